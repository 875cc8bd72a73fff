"""Ordered gate lists and their JSON form."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ._validation import check_int
from .gates import Gate
from .simulator import ORDERING_NOTE


@dataclass
class Circuit:
    """Gates over ``n_sites`` sites of dimension ``site_dim``, first gate applied first."""

    n_sites: int
    site_dim: int = 2
    gates: list[Gate] = field(default_factory=list)
    ordering_note: str = ORDERING_NOTE

    def __post_init__(self):
        self.n_sites = check_int(self.n_sites, "n_sites", low=1)
        self.site_dim = check_int(self.site_dim, "site_dim", low=2, high=3)
        self.gates = list(self.gates)
        for gate in self.gates:
            self._check(gate)

    def _check(self, gate):
        for t in gate.targets:
            if not 1 <= t <= self.n_sites:
                raise ValueError(f"gate target {t} outside [1, {self.n_sites}]")
        if gate.kind == "tailored" and len(gate.targets) != self.n_sites:
            raise ValueError("tailored evolution must span every site")

    def append(self, gate):
        self._check(gate)
        self.gates.append(gate)
        return self

    def extend(self, gates):
        for g in gates:
            self.append(g)
        return self

    def __len__(self):
        return len(self.gates)

    def count(self, kind):
        return sum(g.kind == kind for g in self.gates)

    def unitary(self):
        from .simulator import compose

        return compose(self)

    def to_dict(self):
        return {
            "n_sites": self.n_sites,
            "site_dim": self.site_dim,
            "gates": [g.to_dict() for g in self.gates],
            "ordering_note": self.ordering_note,
        }

    def to_json(self, indent=None):
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(
                n_sites=data["n_sites"],
                site_dim=data.get("site_dim", 2),
                gates=[Gate.from_dict(g) for g in data["gates"]],
                ordering_note=data.get("ordering_note", ORDERING_NOTE),
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed circuit: {exc}") from exc

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))
