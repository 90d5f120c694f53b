"""The four security conditions for a candidate tagging unitary.

All strict inequalities are decided with a declared margin so borderline
unitaries surface in the report instead of being silently classified.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import DEFAULT_TOL
from .linalg import is_unitary
from .protocol import as_tagging_unitary

STRICT = DEFAULT_TOL.strict


def ec_gorda_lhs(x: float, y: float, z: float) -> float:
    """Left-hand side of the overlapping-rows bound (must be < 1).

    (1/2) x {1 + (x/y)[1 + (x/y)^2]^(-1/2)} + (1/2) y [1 + (x/y)^2]^(1/2) + z
    """
    if y <= 0:
        raise ValueError("y must be positive; y = 0 routes to case 1")
    r = x / y
    s = np.sqrt(1 + r * r)
    return float(0.5 * x * (1 + r / s) + 0.5 * y * s + z)


def row_parameters(u) -> tuple:
    """(x, y, z) from the first-block rows of the tagging unitary."""
    u = as_tagging_unitary(u)
    r0, r1 = u.row(0, 0), u.row(0, 1)
    x = float(np.linalg.norm(r0) ** 2 - np.linalg.norm(r1) ** 2)
    y = float(2 * abs(r1 @ r0.conj()))
    z = float(np.linalg.norm(r1) ** 2)
    return x, y, z


@dataclass(frozen=True)
class ConditionCheck:
    satisfied: bool
    margin: float
    applies: bool = True
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "satisfied": self.satisfied,
            "applies": self.applies,
            "margin": self.margin,
            "details": self.details,
        }


def check_case1(u) -> ConditionCheck:
    """Non-overlapping rows: both M0 row norms must stay strictly below 1."""
    u = as_tagging_unitary(u)
    x, y, z = row_parameters(u)
    applies = y <= STRICT
    n0sq = float(np.linalg.norm(u.row(0, 0)) ** 2)
    n1sq = float(np.linalg.norm(u.row(0, 1)) ** 2)
    margin = min(1 - n0sq, 1 - n1sq)
    return ConditionCheck(
        satisfied=applies and margin > STRICT,
        margin=margin,
        applies=applies,
        details={"row0_norm_sq": n0sq, "row1_norm_sq": n1sq, "y": y},
    )


def check_case2(u) -> ConditionCheck:
    """Overlapping rows: the closed-form maximum must stay strictly below 1."""
    u = as_tagging_unitary(u)
    x, y, z = row_parameters(u)
    applies = y > STRICT
    if not applies:
        return ConditionCheck(
            satisfied=False, margin=float("nan"), applies=False, details={"y": y}
        )
    lhs = ec_gorda_lhs(x, y, z)
    return ConditionCheck(
        satisfied=lhs < 1 - STRICT,
        margin=1 - lhs,
        applies=True,
        details={"lhs": lhs, "x": x, "y": y, "z": z},
    )


def _phase_equiv_swap(c0: np.ndarray, c1: np.ndarray) -> float:
    """Distance of (c0, c1) from the relation c0 = e^{ig} S(d) sigma_x c1.

    With both phases free the relation reduces to moduli equality between
    swapped components; the return value is the worst moduli mismatch
    (0 means the relation is satisfiable).
    """
    return float(max(abs(abs(c0[0]) - abs(c1[1])), abs(abs(c0[1]) - abs(c1[0]))))


def check_condition3(u) -> ConditionCheck:
    """No certainty substitution attack.

    Satisfied iff the M0 columns are NOT phase-equivalent under the
    phase-shifted swap; when they are, a certainty attack is always
    constructible (the bottom-block completion exists for every unitary,
    so the auxiliary M2-column clause never rescues security — it is
    reported in the details for reference only).
    """
    u = as_tagging_unitary(u)
    c00, c01 = u.col(0, 0), u.col(0, 1)
    c20, c21 = u.col(2, 0), u.col(2, 1)
    mismatch = _phase_equiv_swap(c00, c01)
    m2_inner = abs(np.vdot(c20, c21))
    n20, n21 = np.linalg.norm(c20), np.linalg.norm(c21)
    if n20 > STRICT and n21 > STRICT:
        m2_parallel_gap = float(
            np.linalg.norm(c20 / n20 - c21 / n21 * np.exp(1j * np.angle(np.vdot(c21, c20))))
        )
    else:
        m2_parallel_gap = float(abs(n20 - n21))
    return ConditionCheck(
        satisfied=mismatch > STRICT,
        margin=mismatch,
        details={
            "m0_swap_mismatch": mismatch,
            "m2_inner_product": float(m2_inner),
            "m2_parallel_gap": m2_parallel_gap,
        },
    )


def check_condition4(u) -> ConditionCheck:
    """The key cannot be pinned down by measurement: the M0 block is nonzero.

    Redundant given condition 3 (a vanishing M0 block makes the swap
    relation hold trivially); kept as an explicit cross-check.
    """
    u = as_tagging_unitary(u)
    norms = (np.linalg.norm(u.col(0, 0)), np.linalg.norm(u.col(0, 1)))
    margin = float(max(norms))
    return ConditionCheck(
        satisfied=margin > STRICT,
        margin=margin,
        details={"m0_col_norms": [float(n) for n in norms]},
    )


@dataclass(frozen=True)
class ConditionReport:
    case1: ConditionCheck
    case2: ConditionCheck
    condition3: ConditionCheck
    condition4: ConditionCheck
    overall_secure: bool
    advisory: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "case1": self.case1.to_json(),
            "case2": self.case2.to_json(),
            "condition3": self.condition3.to_json(),
            "condition4": self.condition4.to_json(),
            "condition4_note": "redundant: implied by condition 3",
            "overall_secure": self.overall_secure,
            "advisory": self.advisory,
        }


def validate(
    u,
    attack_budget: int = 2000,
    seed: int = 0,
    include_attacks: bool = True,
) -> ConditionReport:
    """Aggregate all security checks for a candidate tagging unitary.

    ``overall_secure`` requires the applicable row case (1 or 2) and
    condition 3; condition 4 is implied.  Advisory fields carry the
    optimal no-message forgery probability and a searched substitution
    attack snapshot.
    """
    from .adversary import best_message_attack, no_message_optimal

    if not isinstance(u, np.ndarray) and not hasattr(u, "u"):
        u = np.asarray(u, dtype=complex)
    raw = u.u if hasattr(u, "u") else u
    ok, dev = is_unitary(raw, DEFAULT_TOL.unitary)
    if not ok:
        raise ValueError(f"input is not unitary (deviation {dev:.3e})")
    tu = as_tagging_unitary(u)

    c1 = check_case1(tu)
    c2 = check_case2(tu)
    c3 = check_condition3(tu)
    c4 = check_condition4(tu)
    row_ok = c1.satisfied if c1.applies else c2.satisfied
    secure = bool(row_ok and c3.satisfied)

    advisory = {}
    if include_attacks:
        opt = no_message_optimal(tu)
        rng = np.random.default_rng(seed)
        search = best_message_attack(tu, budget=attack_budget, rng=rng)
        advisory = {
            "no_message_pf_optimal": opt.probability,
            "message_attack_pf_best": search.probability,
            "attack_budget": attack_budget,
            "seed": seed,
        }
    return ConditionReport(
        case1=c1, case2=c2, condition3=c3, condition4=c4,
        overall_secure=secure, advisory=advisory,
    )
