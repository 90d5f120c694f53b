"""Heuristic search for tagging unitaries balancing the attack families.

No optimality criterion exists for the tagging operation; the scalar
score used here (worst case over the two attack families) is explicitly
heuristic and labeled as such in all emitted metadata.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .adversary import (
    best_message_attack,
    hermitian_to_params,
    no_message_optimal,
    params_to_hermitian,
    unitary_from_params,
)
from .conditions import validate
from .linalg import dagger, haar_random_unitary, matrix_to_json
from .protocol import TaggingUnitary, as_tagging_unitary

INSECURE = float("inf")


@dataclass(frozen=True)
class SecurityScore:
    pf_no_message: float
    pf_message_best: float
    secure: bool
    score: float

    def to_json(self) -> dict:
        return {
            "pf_no_message": self.pf_no_message,
            "pf_message_best": self.pf_message_best,
            "secure": self.secure,
            "score": self.score if self.secure else None,
            "score_kind": "heuristic-worst-case",
        }


def worst_case_score(pf_no_message: float, pf_message: float) -> float:
    return max(pf_no_message, pf_message)


def security_score(
    u,
    budget: int = 2000,
    rng: Optional[np.random.Generator] = None,
    combine: Callable[[float, float], float] = worst_case_score,
) -> SecurityScore:
    """Validate a candidate and score it by its attack probabilities.

    Insecure candidates get an infinite sentinel score.  Deterministic
    for a fixed rng seed and budget.
    """
    u = as_tagging_unitary(u)
    rng = rng if rng is not None else np.random.default_rng(0)
    report = validate(u, include_attacks=False)
    pf_nm = no_message_optimal(u).probability
    pf_msg = best_message_attack(u, budget=budget, rng=rng).probability
    secure = report.overall_secure
    return SecurityScore(
        pf_no_message=pf_nm,
        pf_message_best=pf_msg,
        secure=secure,
        score=combine(pf_nm, pf_msg) if secure else INSECURE,
    )


@dataclass
class DesignResult:
    unitary: np.ndarray
    score: SecurityScore
    trace: list = field(default_factory=list)  # (restart, iter, score) tuples

    def to_json(self) -> dict:
        return {
            "unitary": matrix_to_json(self.unitary),
            "score": self.score.to_json(),
            "trace_length": len(self.trace),
        }


def _log_params(u: np.ndarray) -> np.ndarray:
    w, vecs = np.linalg.eig(u)
    h = (vecs * np.angle(w)) @ np.linalg.inv(vecs)
    return hermitian_to_params((h + dagger(h)) / 2)


def optimize(
    restarts: int = 8,
    budget: int = 500,
    rng: Optional[np.random.Generator] = None,
    refine_steps: int = 24,
    warm_start: Optional[np.ndarray] = None,
    combine: Callable[[float, float], float] = worst_case_score,
) -> DesignResult:
    """Multi-start search for a secure tagging unitary with low score.

    Haar restarts are filtered through the validator (insecure samples are
    discarded, not penalized); each surviving candidate is refined by
    coordinate-wise descent on the exp(iH) chart.  ``budget`` is the
    attack-search budget per score evaluation.  Reproducible per seed;
    ties between restarts break toward the lowest restart index.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    rng = rng if rng is not None else np.random.default_rng(0)

    def evaluate(mat, seed):
        try:
            return security_score(
                mat, budget=budget, rng=np.random.default_rng(seed), combine=combine
            )
        except ValueError:
            return SecurityScore(1.0, 1.0, False, INSECURE)

    trace = []
    best: Optional[tuple] = None  # (score value, restart idx, params, SecurityScore)
    for restart in range(restarts):
        if restart == 0 and warm_start is not None:
            candidate = np.asarray(warm_start, dtype=complex)
        else:
            candidate = haar_random_unitary(4, rng)
        p = _log_params(candidate)
        sc = evaluate(unitary_from_params(p), seed=restart)
        tries = 0
        while not sc.secure and tries < 50:
            candidate = haar_random_unitary(4, rng)
            p = _log_params(candidate)
            sc = evaluate(unitary_from_params(p), seed=restart)
            tries += 1
        if not sc.secure:
            continue
        trace.append((restart, 0, sc.score))
        step = 0.2
        it = 0
        order = rng.permutation(16)
        while it < refine_steps and step > 1e-4:
            k = int(order[it % 16])
            improved = False
            for sign in (1.0, -1.0):
                q = p.copy()
                q[k] += sign * step
                cand = evaluate(unitary_from_params(q), seed=restart)
                it += 1
                if cand.secure and cand.score < sc.score - 1e-12:
                    p, sc = q, cand
                    trace.append((restart, it, sc.score))
                    improved = True
                    break
                if it >= refine_steps:
                    break
            if not improved:
                step *= 0.5
        if best is None or sc.score < best[0] - 1e-15:
            best = (sc.score, restart, p, sc)

    if best is None:
        raise RuntimeError("no secure candidate found; increase restarts")
    _, _, p, sc = best
    return DesignResult(unitary=unitary_from_params(p), score=sc, trace=trace)
