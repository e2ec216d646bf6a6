"""Check records shared by every verification sweep."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence


def _text(obj) -> str:
    return str(obj)


@dataclass
class CheckResult:
    """Outcome of one quantified identity check.

    ``domain_size`` counts the instances examined; ``failures`` counts the
    instances whose residual was not structurally zero.  The first failing
    instance is kept as a witness together with its exact residual text.
    """

    name: str
    domain_size: int = 0
    failures: int = 0
    first_witness: tuple[str, ...] | None = None
    residual: str | None = None
    kind: str = "identity"  # or "precondition"
    detail: dict = field(default_factory=dict)

    @property
    def passes(self) -> int:
        return self.domain_size - self.failures

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def record(self, residual, witness: Sequence) -> bool:
        """Count one instance; returns True when its residual is zero."""
        self.domain_size += 1
        if not residual:
            return True
        self.failures += 1
        if self.first_witness is None:
            self.first_witness = tuple(_text(w) for w in witness)
            self.residual = _text(residual)
        return False

    def record_bool(self, ok: bool, witness: Sequence, residual="false") -> bool:
        self.domain_size += 1
        if ok:
            return True
        self.failures += 1
        if self.first_witness is None:
            self.first_witness = tuple(_text(w) for w in witness)
            self.residual = _text(residual)
        return False

    def merge(self, other: "CheckResult") -> "CheckResult":
        """Combine two partial sweeps of the same check (associative)."""
        out = CheckResult(self.name, self.domain_size + other.domain_size,
                          self.failures + other.failures, kind=self.kind,
                          detail={**self.detail, **other.detail})
        src = self if self.first_witness is not None else other
        out.first_witness, out.residual = src.first_witness, src.residual
        return out

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "kind": self.kind,
            "domain_size": self.domain_size,
            "pass_count": self.passes,
            "fail_count": self.failures,
            "passed": self.passed,
            "first_witness": list(self.first_witness) if self.first_witness else None,
            "residual": self.residual,
        }
        if self.detail:
            d["detail"] = self.detail
        return d


def all_passed(results: Iterable[CheckResult]) -> bool:
    return all(r.passed for r in results)


def select_positions(total: int, budget: int | None, seed: int) -> range | list[int]:
    """Positions of the canonical enumeration to visit.

    Exhaustive when ``budget`` is None or not smaller than ``total``;
    otherwise a seeded sample, returned in canonical (ascending) order.
    """
    if budget is None or budget >= total:
        return range(total)
    if budget < 0:
        raise ValueError("budget must be non-negative")
    return sorted(random.Random(seed).sample(range(total), budget))
