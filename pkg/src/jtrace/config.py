"""Run configuration: JSON loading, schema validation and object construction."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Any

import jsonschema

from .errors import InputError
from .lattice import EvenLattice, HSpec, to_vec
from .qseries import SamplePoint
from .voa.family import ModuleFamily
from .voa.heisenberg import HeisenbergModule, SquareMonomial

COMMANDS = ("expand", "eval", "reduce", "verify", "fit-smatrix", "oracle")
GAMMAS = {"S": ((0, -1), (1, 0)), "T": ((1, 1), (0, 1)), "ST": ((0, -1), (1, 1)),
          "I": ((1, 0), (0, 1))}


def load_schema() -> dict:
    text = resources.files("jtrace").joinpath("schemas/config.schema.json").read_text()
    return json.loads(text)


def validate(data: Any) -> None:
    """Raise InputError listing every schema violation with its field path."""
    v = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(v.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        lines = []
        for e in errors:
            path = "/" + "/".join(str(p) for p in e.absolute_path)
            lines.append(f"config error at {path}: {e.message}")
        raise InputError("\n".join(lines))


@dataclass
class RunConfig:
    command: str
    data: dict = field(default_factory=dict)
    seed: int = 0
    tol: float = 1e-8
    trunc: int = 20

    @classmethod
    def from_dict(cls, command: str, data: dict, tol: float | None = None,
                  trunc: int | None = None) -> "RunConfig":
        if command not in COMMANDS:
            raise InputError(f"unknown command {command!r}")
        validate(data)
        if data.get("command", command) != command:
            raise InputError(f"config is for {data['command']!r}, not {command!r}")
        return cls(command, data, int(data.get("seed", 0)),
                   float(tol if tol is not None else data.get("tol", 1e-8)),
                   int(trunc if trunc is not None else data.get("trunc", 20)))

    @classmethod
    def load(cls, command: str, path: str, tol: float | None = None,
             trunc: int | None = None) -> "RunConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as e:
            raise InputError(f"cannot read config {path}: {e.strerror}") from None
        except json.JSONDecodeError as e:
            raise InputError(f"config {path} is not valid JSON: {e}") from None
        return cls.from_dict(command, data, tol, trunc)

    # builders

    def get(self, key: str, default=None):
        return self.data.get(key, default)

    def require(self, key: str):
        if key not in self.data:
            raise InputError(f"config error at /{key}: required for {self.command}")
        return self.data[key]

    def has_lattice(self) -> bool:
        return "lattice" in self.data

    def family(self) -> ModuleFamily:
        spec = self.require("lattice")
        L = EvenLattice(spec["gram"])
        gens = spec.get("generators")
        return ModuleFamily.lattice_voa(L, [to_vec(_fracs(g)) for g in gens] if gens else None)

    def module(self):
        """(module, h-vectors, family or None) for the configured module."""
        if self.has_lattice():
            fam = self.family()
            r = int(self.get("module", 0))
            if r >= len(fam):
                raise InputError(f"config error at /module: lattice has only {len(fam)} modules")
            hs = HSpec(tuple(to_vec(_fracs(h)) for h in self.get("h", [])))
            hs.validate(fam.lattice)
            for k in range(len(fam)):
                hs.exponents(fam.lattice, fam.coset_of(k))
            return fam.module(r), hs, fam
        if "heisenberg" in self.data:
            spec = self.data["heisenberg"]
            M = HeisenbergModule(tuple(_fracs(spec["norms"])),
                                 tuple(_fracs(spec["alpha"])) if "alpha" in spec else None)
            hs = tuple(tuple(_fracs(h)) for h in self.get("h", []))
            M.zeta_exponents(hs)
            return M, hs, None
        raise InputError("config error at /: need a lattice or a heisenberg module")

    def monomial(self) -> SquareMonomial:
        spec = self.get("monomial", {})
        return SquareMonomial(tuple(tuple(f) for f in spec.get("factors", [])),
                              spec.get("tail", "vacuum"))

    def gamma(self):
        g = self.get("gamma", "S")
        return GAMMAS[g] if isinstance(g, str) else tuple(tuple(r) for r in g)

    def points(self, n_z: int) -> list[SamplePoint]:
        from .jacobi import sample_points
        if "points" in self.data:
            out = []
            for i, p in enumerate(self.data["points"]):
                zs = tuple(complex(*z) for z in p.get("z", []))
                if len(zs) != n_z:
                    raise InputError(f"config error at /points/{i}/z: expected {n_z} entries")
                out.append(SamplePoint(complex(*p["tau"]), zs,
                                       complex(*p["w"]) if "w" in p else None))
            return out
        return sample_points(self.seed, int(self.get("samples", 5)), n_z)


def _fracs(xs) -> list[Fraction]:
    return [Fraction(x) for x in xs]
