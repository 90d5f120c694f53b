"""Attack families against the tagging protocol and their optimization.

Covers: no-message forgery (closed form, restricted two-parameter form,
and exact eigen-optimal), message substitution (perfect-attack
construction and derivative-free search over unitaries), the
key-distinguishing measurement attack, and key-reuse entangling attacks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import DEFAULT_TOL
from .linalg import dagger, eig_hermitian, haar_random_unitary, matrix_to_json, tensor
from .protocol import (
    ACCEPT_PROJECTOR,
    I2,
    I4,
    MESSAGE_BASIS,
    TaggingUnitary,
    as_tagging_unitary,
    decode,
    joint_state,
    measurement_distribution,
    singlet,
)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)


def phase_shift(beta: float) -> np.ndarray:
    """S(beta) = diag(1, e^{i beta})."""
    return np.diag([1.0, np.exp(1j * beta)]).astype(complex)


@dataclass(frozen=True)
class AttackResult:
    """A forgery probability with its witnessing strategy."""

    probability: float
    strategy: np.ndarray  # state vector or attack unitary
    method: str  # closed_form | eigen_optimal | grid_oracle | search
    budget: Optional[int] = None
    iterations: Optional[int] = None
    seed: Optional[int] = None

    def to_json(self) -> dict:
        return {
            "probability": self.probability,
            "method": self.method,
            "strategy": matrix_to_json(self.strategy),
            "budget": self.budget,
            "seed": self.seed,
        }


# --- no-message attack -------------------------------------------------------

def no_message_pf(u, eve: np.ndarray) -> float:
    """Forgery probability of injecting the pure state ``eve``.

    Evaluates (1/2) sum_{i=0,1} (|e_i|^2 + |<eve|U|phi_i>|^2).
    """
    u = as_tagging_unitary(u)
    eve = np.asarray(eve, dtype=complex).reshape(4)
    nrm = np.linalg.norm(eve)
    if abs(nrm - 1) > 1e-10:
        raise ValueError(f"Eve's state must be normalized (norm {nrm})")
    direct = np.abs(eve[:2]) ** 2
    overlaps = np.abs(dagger(u.u) @ eve)[:2] ** 2
    return float(0.5 * (direct.sum() + overlaps.sum()))


def no_message_pf_batch(u, states: np.ndarray) -> np.ndarray:
    """Vectorized :func:`no_message_pf` over columns of a 4×N array."""
    u = as_tagging_unitary(u)
    direct = (np.abs(states[:2]) ** 2).sum(axis=0)
    overlaps = (np.abs(dagger(u.u) @ states)[:2] ** 2).sum(axis=0)
    return 0.5 * (direct + overlaps)


def no_message_pf_restricted(u, abs_e0: float, theta: float) -> float:
    """The two-parameter restricted form (e2 = e3 = 0).

    Decision variables are |e0| and the relative phase angle; the first
    closed-form term equals 1/2 under the restriction.
    """
    if not 0 <= abs_e0 <= 1:
        raise ValueError("abs_e0 must lie in [0, 1]")
    u = as_tagging_unitary(u)
    r0, r1 = u.row(0, 0), u.row(0, 1)
    x = np.linalg.norm(r0) ** 2 - np.linalg.norm(r1) ** 2
    coupling = abs(r1 @ r0.conj())
    z = np.linalg.norm(r1) ** 2
    second = 0.5 * (
        x * abs_e0**2
        + 2 * coupling * abs_e0 * np.sqrt(max(0.0, 1 - abs_e0**2)) * np.cos(theta)
        + z
    )
    return float(0.5 + second)


def eve_state_from_restricted(u, abs_e0: float, theta: float) -> np.ndarray:
    """Explicit injected state realizing the restricted parameters."""
    u = as_tagging_unitary(u)
    g = u.row(0, 0) @ u.row(0, 1).conj()  # cross-row coupling, phase matters
    phase = theta - np.angle(g) if abs(g) > 0 else theta
    e1 = np.sqrt(max(0.0, 1 - abs_e0**2)) * np.exp(1j * phase)
    return np.array([abs_e0, e1, 0, 0], dtype=complex)


def forgery_operator(u) -> np.ndarray:
    """Q = U P U† + P with P the accept projector."""
    u = as_tagging_unitary(u)
    return u.u @ ACCEPT_PROJECTOR @ dagger(u.u) + ACCEPT_PROJECTOR


def no_message_optimal(u) -> AttackResult:
    """Exact optimum over all injected states: lambda_max(Q)/2.

    The witnessing strategy is a top eigenvector of Q.
    """
    u = as_tagging_unitary(u)
    eig = eig_hermitian(forgery_operator(u))
    lam = float(eig.eigenvalues[-1])
    vec = eig.eigenvectors[:, -1]
    return AttackResult(probability=lam / 2, strategy=vec, method="eigen_optimal")


def injected_acceptance_distribution(u, eve: np.ndarray) -> np.ndarray:
    """Bob's outcome distribution when Eve injects ``eve`` with no message.

    Full 16-dim simulation: the key is still the untouched singlet.
    """
    u = as_tagging_unitary(u)
    state = joint_state(singlet(), np.asarray(eve, dtype=complex).reshape(4))
    return measurement_distribution(decode(u, state))


def no_message_attack_sim(u, eve, trials: int, rng: np.random.Generator) -> float:
    """Monte Carlo acceptance frequency for an injected state."""
    probs = injected_acceptance_distribution(u, eve)
    outcomes = rng.choice(4, size=trials, p=probs / probs.sum())
    return float((outcomes < 2).mean())


# --- message (substitution) attack ------------------------------------------

def _check_priors(p0: float, p1: float):
    if p0 < 0 or p1 < 0 or abs(p0 + p1 - 1) > 1e-12:
        raise ValueError(f"priors must be nonnegative and sum to 1, got {p0}, {p1}")


def message_attack_pf(u, v: np.ndarray, p0: float = 0.5, p1: float = 0.5) -> float:
    """Probability that applying ``v`` in the channel flips the decoded bit.

    sum_i p_i (1/2)(|<phi_j|V|phi_i>|^2 + |<phi_j|U†VU|phi_i>|^2), j != i.
    """
    u = as_tagging_unitary(u)
    _check_priors(p0, p1)
    v = np.asarray(v, dtype=complex)
    from .linalg import is_unitary

    ok, dev = is_unitary(v, DEFAULT_TOL.unitary)
    if not ok:
        raise ValueError(f"attack operation must be unitary (deviation {dev:.3e})")
    w = dagger(u.u) @ v @ u.u
    total = 0.0
    for i, p in ((0, p0), (1, p1)):
        j = 1 - i
        total += p * 0.5 * (abs(v[j, i]) ** 2 + abs(w[j, i]) ** 2)
    return float(total)


def message_attack_distribution(u, v: np.ndarray, message: int) -> np.ndarray:
    """Bob's outcome distribution when Eve applies ``v`` to an honest round."""
    u = as_tagging_unitary(u)
    from .protocol import encode

    state = encode(u, message)
    state = tensor(I2, I2, np.asarray(v, dtype=complex)) @ state
    return measurement_distribution(decode(u, state))


def message_attack_sim(
    u, v, trials: int, rng: np.random.Generator, p0: float = 0.5, p1: float = 0.5
) -> float:
    """Monte Carlo frequency of successful substitution (flip accepted)."""
    _check_priors(p0, p1)
    dists = [message_attack_distribution(u, v, i) for i in (0, 1)]
    messages = rng.choice(2, size=trials, p=[p0, p1])
    hits = 0
    for i in (0, 1):
        n = int((messages == i).sum())
        if n == 0:
            continue
        outcomes = rng.choice(4, size=n, p=dists[i] / dists[i].sum())
        hits += int((outcomes == 1 - i).sum())
    return hits / trials


def _map_frames(sources, targets, dim: int = 2) -> Optional[np.ndarray]:
    """Unitary T with T s_k = t_k, if one exists (Gram matrices must match)."""

    def orthonormalize(vs):
        out = []
        for v in vs:
            w = v.astype(complex).copy()
            for o in out:
                w -= np.vdot(o, w) * o
            n = np.linalg.norm(w)
            if n > 1e-9:
                out.append(w / n)
        # complete to a full basis
        for e in np.eye(dim, dtype=complex):
            w = e.copy()
            for o in out:
                w -= np.vdot(o, w) * o
            n = np.linalg.norm(w)
            if n > 1e-9:
                out.append(w / n)
        return np.stack(out, axis=1)

    a = orthonormalize(sources)
    b = orthonormalize(targets)
    t = b @ dagger(a)
    for s, tgt in zip(sources, targets):
        if np.linalg.norm(t @ s - tgt) > 1e-8:
            return None
    return t


def perfect_message_attack(u) -> Optional[np.ndarray]:
    """Construct a certainty substitution attack if one exists.

    A perfect attack forces V to be block diagonal with an anti-diagonal
    top block, and exists precisely when the two columns of the M0 block
    are phase-equivalent under S(delta) sigma_x, i.e. when
    |M0^0[0]| = |M0^1[1]| and |M0^0[1]| = |M0^1[0]|.  The bottom block of
    V is then completed by mapping the M2 columns onto each other with
    matching phases (always possible: column orthogonality of U makes the
    Gram matrices agree).  Returns None when no perfect attack exists.
    """
    u = as_tagging_unitary(u)
    tol = DEFAULT_TOL.phase_equiv
    c00, c01 = u.col(0, 0), u.col(0, 1)
    c20, c21 = u.col(2, 0), u.col(2, 1)
    if abs(abs(c00[0]) - abs(c01[1])) > tol or abs(abs(c00[1]) - abs(c01[0])) > tol:
        return None
    gamma = np.angle(c00[0] / c01[1]) if abs(c01[1]) > tol else 0.0
    gd = np.angle(c00[1] / c01[0]) if abs(c01[0]) > tol else gamma
    delta = gd - gamma
    m0e = np.exp(-1j * (gamma + delta)) * phase_shift(delta) @ SIGMA_X
    # Global phases forced on the bottom block by the top block.
    t0 = m0e @ c00
    theta0 = np.angle(np.vdot(c01, t0)) if np.linalg.norm(c01) > tol else 0.0
    t1 = m0e @ c01
    theta1 = np.angle(np.vdot(c00, t1)) if np.linalg.norm(c00) > tol else 0.0
    m1e = _map_frames(
        [c20, c21], [np.exp(1j * theta0) * c21, np.exp(1j * theta1) * c20]
    )
    if m1e is None:
        return None
    v = np.zeros((4, 4), dtype=complex)
    v[:2, :2] = m0e
    v[2:, 2:] = m1e
    if message_attack_pf(u, v) < 1 - DEFAULT_TOL.strict:
        return None
    return v


# 16 real parameters of a 4x4 Hermitian generator: 4 diagonal + 6 complex
# strictly-upper entries.
_UPPER = [(i, j) for i in range(4) for j in range(i + 1, 4)]


def params_to_hermitian(p: np.ndarray) -> np.ndarray:
    h = np.zeros((4, 4), dtype=complex)
    h[np.diag_indices(4)] = p[:4]
    for k, (i, j) in enumerate(_UPPER):
        h[i, j] = p[4 + 2 * k] + 1j * p[5 + 2 * k]
        h[j, i] = p[4 + 2 * k] - 1j * p[5 + 2 * k]
    return h


def hermitian_to_params(h: np.ndarray) -> np.ndarray:
    p = np.empty(16)
    p[:4] = np.real(np.diag(h))
    for k, (i, j) in enumerate(_UPPER):
        p[4 + 2 * k] = h[i, j].real
        p[5 + 2 * k] = h[i, j].imag
    return p


def unitary_from_params(p: np.ndarray) -> np.ndarray:
    """V = exp(iH) with H from the 16-parameter chart."""
    h = params_to_hermitian(p)
    w, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(1j * w)) @ dagger(vecs)


def _params_of_unitary(v: np.ndarray) -> np.ndarray:
    """A Hermitian logarithm chart point for a given unitary."""
    w, vecs = np.linalg.eig(v)
    h = (vecs * np.angle(w)) @ np.linalg.inv(vecs)
    h = (h + dagger(h)) / 2
    return hermitian_to_params(h)


def best_message_attack(
    u,
    p0: float = 0.5,
    p1: float = 0.5,
    budget: int = 10_000,
    rng: Optional[np.random.Generator] = None,
) -> AttackResult:
    """Maximize :func:`message_attack_pf` over unitaries by multi-start
    coordinate-wise derivative-free descent on the exp(iH) chart.

    Deterministic for a given rng seed.  The perfect-attack construction,
    when available, seeds one restart, so the search never undershoots a
    known certainty attack.
    """
    u = as_tagging_unitary(u)
    _check_priors(p0, p1)
    if budget < 1:
        raise ValueError("budget must be >= 1")
    rng = rng if rng is not None else np.random.default_rng(0)

    w_cache = dagger(u.u)

    def objective(p):
        v = unitary_from_params(p)
        w = w_cache @ v @ u.u
        return (
            p0 * 0.5 * (abs(v[1, 0]) ** 2 + abs(w[1, 0]) ** 2)
            + p1 * 0.5 * (abs(v[0, 1]) ** 2 + abs(w[0, 1]) ** 2)
        )

    starts = []
    swap = np.zeros((4, 4), dtype=complex)
    swap[:2, :2] = SIGMA_X
    swap[2:, 2:] = I2
    starts.append(_params_of_unitary(swap))
    perfect = perfect_message_attack(u)
    if perfect is not None:
        starts.append(_params_of_unitary(perfect))
    n_restarts = max(len(starts), min(12, budget // 300))
    while len(starts) < n_restarts:
        starts.append(_params_of_unitary(haar_random_unitary(4, rng)))

    evals = 0
    best_val, best_p = -1.0, None
    per_restart = max(1, budget // len(starts))
    for p_start in starts:
        if evals >= budget:
            break
        p = np.asarray(p_start, dtype=float).copy()
        val = objective(p)
        evals += 1
        step = 0.3
        spent = 1
        while step > 1e-6 and spent < per_restart and evals < budget:
            improved = False
            for k in range(16):
                for sign in (1.0, -1.0):
                    if spent >= per_restart or evals >= budget:
                        break
                    trial = p.copy()
                    trial[k] += sign * step
                    tv = objective(trial)
                    evals += 1
                    spent += 1
                    if tv > val + 1e-14:
                        p, val = trial, tv
                        improved = True
                        break
            if not improved:
                step *= 0.5
        if val > best_val:
            best_val, best_p = val, p

    return AttackResult(
        probability=float(best_val),
        strategy=unitary_from_params(best_p),
        method="search",
        budget=budget,
        iterations=evals,
    )


# --- measurement (key-distinguishing) attack --------------------------------

@dataclass(frozen=True)
class KeyDistinguishabilityReport:
    distinguishable: bool
    gram: np.ndarray  # <phi_i|U|phi_j> for i, j in {0, 1}

    def to_json(self) -> dict:
        return {
            "distinguishable": self.distinguishable,
            "gram": matrix_to_json(self.gram),
        }


def key_distinguishability(u) -> KeyDistinguishabilityReport:
    """Can Eve perfectly identify which channel branch occurred?

    She can iff <phi_i|U|phi_j> = 0 for all i, j in {0, 1}, i.e. the M0
    block vanishes.
    """
    u = as_tagging_unitary(u)
    gram = u.block(0).copy()
    return KeyDistinguishabilityReport(
        distinguishable=bool(np.abs(gram).max() <= DEFAULT_TOL.strict), gram=gram
    )


# --- key reuse ---------------------------------------------------------------

@dataclass(frozen=True)
class KeyReuseFeasibilityReport:
    ruled_out: bool
    witness: Optional[int]  # message index with <phi_i|U|phi_i> != 0
    diagonal_overlaps: tuple

    def to_json(self) -> dict:
        return {
            "ruled_out": self.ruled_out,
            "witness": self.witness,
            "diagonal_overlaps": list(self.diagonal_overlaps),
        }


def key_reuse_feasibility(u) -> KeyReuseFeasibilityReport:
    """Is the certainty key-entangling attack impossible for this tagging?

    Ruled out when <phi_i|U|phi_i> != 0 for some i in {0, 1}: the attack
    unitary would have to map non-orthogonal inputs to orthogonal outputs.
    """
    u = as_tagging_unitary(u)
    diag = (abs(complex(u.u[0, 0])), abs(complex(u.u[1, 1])))
    witness = next((i for i in (0, 1) if diag[i] > DEFAULT_TOL.strict), None)
    return KeyReuseFeasibilityReport(
        ruled_out=witness is not None, witness=witness, diagonal_overlaps=diag
    )


@dataclass(frozen=True)
class KeyReuseAttackSpec:
    """Target of the key-entangling attack: the split-key global state."""

    alpha: complex
    beta: complex
    phi_e: np.ndarray
    phi_perp_e: np.ndarray

    def __post_init__(self):
        if abs(abs(self.alpha) ** 2 + abs(self.beta) ** 2 - 1) > 1e-12:
            raise ValueError("|alpha|^2 + |beta|^2 must equal 1")
        for v in (self.phi_e, self.phi_perp_e):
            if abs(np.linalg.norm(v) - 1) > 1e-12:
                raise ValueError("ancilla states must be normalized")
        if abs(np.vdot(self.phi_e, self.phi_perp_e)) > 1e-12:
            raise ValueError("ancilla states must be orthogonal")


@dataclass
class KeyReuseStats:
    per_round_acceptance: list
    final_key_fidelity: float
    forgery_attempts: int
    forgery_successes: int

    @property
    def forgery_success_rate(self) -> float:
        if self.forgery_attempts == 0:
            return float("nan")
        return self.forgery_successes / self.forgery_attempts

    def to_json(self) -> dict:
        return {
            "per_round_acceptance": self.per_round_acceptance,
            "final_key_fidelity": self.final_key_fidelity,
            "forgery_attempts": self.forgery_attempts,
            "forgery_successes": self.forgery_successes,
            "forgery_success_rate": self.forgery_success_rate,
        }


_DIMS = (2, 2, 4, 2)  # key A, key B, message E, Eve ancilla


def _reuse_operators(u: TaggingUnitary, interaction: np.ndarray):
    from .linalg import is_unitary

    interaction = np.asarray(interaction, dtype=complex)
    if interaction.shape != (8, 8):
        raise ValueError("Eve's interaction must act on message ⊗ ancilla (8-dim)")
    ok, dev = is_unitary(interaction, DEFAULT_TOL.unitary)
    if not ok:
        raise ValueError(f"Eve's interaction must be unitary (deviation {dev:.3e})")
    i_anc = np.eye(2, dtype=complex)
    enc = tensor(u.encode_op, i_anc)
    dec = tensor(u.decode_op, i_anc)
    eve = tensor(np.eye(4, dtype=complex), interaction)
    p0 = np.diag([1, 0]).astype(complex)
    p1 = np.diag([0, 1]).astype(complex)
    # Eve re-runs the encoding with her ancilla as the control qubit.
    forge_enc = tensor(np.eye(4, dtype=complex), tensor(I4, p0) + tensor(u.u, p1))
    return enc, dec, eve, forge_enc


def _measure_message(state: np.ndarray, rng: np.random.Generator):
    amps = state.reshape(_DIMS)
    probs = (np.abs(amps) ** 2).sum(axis=(0, 1, 3))
    outcome = int(rng.choice(4, p=probs / probs.sum()))
    post = np.zeros_like(amps)
    post[:, :, outcome, :] = amps[:, :, outcome, :]
    post = post.reshape(-1)
    return outcome, post / np.linalg.norm(post)


def _replace_message(state: np.ndarray, new_bit: int) -> np.ndarray:
    """Discard the (collapsed) message register and load a fresh basis state."""
    amps = state.reshape(_DIMS)
    weights = (np.abs(amps) ** 2).sum(axis=(0, 1, 3))
    k = int(np.argmax(weights))
    sub = amps[:, :, k, :]
    fresh = np.zeros_like(amps)
    fresh[:, :, new_bit, :] = sub / np.linalg.norm(sub)
    return fresh.reshape(-1)


def _key_fidelity_joint(state: np.ndarray) -> float:
    from .linalg import partial_trace

    rho = partial_trace(np.outer(state, state.conj()), list(_DIMS), keep={0, 1})
    psi = singlet()
    return float(np.real(psi.conj() @ rho @ psi))


def simulate_key_reuse(
    u,
    rounds: int,
    interaction: np.ndarray,
    rng: np.random.Generator,
    trials: int = 1000,
    forge_bit: int = 0,
) -> KeyReuseStats:
    """Sequential honest rounds with Eve in the channel, then a reuse forgery.

    Each trial runs ``rounds`` honest rounds (Alice's bit drawn uniformly,
    Eve applies ``interaction`` on message ⊗ ancilla in flight, key kept
    only on acceptance), then Eve attempts a forgery against the reused
    key: she loads |phi_forge_bit>, re-runs the tagging controlled on her
    ancilla, and Bob verifies.
    """
    u = as_tagging_unitary(u)
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    enc, dec, eve, forge_enc = _reuse_operators(u, interaction)

    accept_counts = np.zeros(rounds, dtype=int)
    round_attempts = np.zeros(rounds, dtype=int)
    attempts = successes = 0
    fidelities = []
    for _ in range(trials):
        state = tensor(singlet(), MESSAGE_BASIS[:, 0], np.array([1, 0], complex))
        alive = True
        for r in range(rounds):
            bit = int(rng.integers(2))
            state = _replace_message(state, bit) if r > 0 else tensor(
                singlet(), MESSAGE_BASIS[:, bit], np.array([1, 0], complex)
            )
            state = dec @ (eve @ (enc @ state))
            outcome, state = _measure_message(state, rng)
            round_attempts[r] += 1
            if outcome in (0, 1):
                accept_counts[r] += 1
            else:
                alive = False
                break
        if not alive:
            continue
        fidelities.append(_key_fidelity_joint(state))
        # Reuse round: Eve forges using her ancilla as the encoding control.
        state = _replace_message(state, forge_bit)
        state = dec @ (forge_enc @ state)
        outcome, state = _measure_message(state, rng)
        attempts += 1
        if outcome in (0, 1):
            successes += 1

    per_round = [
        accept_counts[r] / round_attempts[r] if round_attempts[r] else float("nan")
        for r in range(rounds)
    ]
    return KeyReuseStats(
        per_round_acceptance=per_round,
        final_key_fidelity=float(np.mean(fidelities)) if fidelities else float("nan"),
        forgery_attempts=attempts,
        forgery_successes=successes,
    )


def reuse_forgery_probability(
    u, interaction: np.ndarray, honest_bit: Optional[int] = None, forge_bit: int = 0
) -> float:
    """Exact success probability of the single-round reuse forgery.

    One honest round with Eve's interaction, conditioned on acceptance;
    then the probability that Eve's ancilla-controlled forgery passes,
    averaged over Bob's accepted first-round outcomes.  ``honest_bit``
    None averages over a uniformly random honest message.
    """
    u = as_tagging_unitary(u)
    enc, dec, eve, forge_enc = _reuse_operators(u, interaction)
    bits = (0, 1) if honest_bit is None else (honest_bit,)
    total_w = 0.0
    total_success = 0.0
    for bit in bits:
        state = tensor(singlet(), MESSAGE_BASIS[:, bit], np.array([1, 0], complex))
        state = dec @ (eve @ (enc @ state))
        amps = state.reshape(_DIMS)
        probs = (np.abs(amps) ** 2).sum(axis=(0, 1, 3))
        for k in (0, 1):
            if probs[k] <= 1e-15:
                continue
            post = np.zeros_like(amps)
            post[:, :, k, :] = amps[:, :, k, :]
            post = post.reshape(-1) / np.sqrt(probs[k])
            post = _replace_message(post, forge_bit)
            final = dec @ (forge_enc @ post)
            facc = (np.abs(final.reshape(_DIMS)) ** 2).sum(axis=(0, 1, 3))[:2].sum()
            total_w += probs[k] / len(bits)
            total_success += probs[k] / len(bits) * facc
    if total_w <= 1e-15:
        return 0.0
    return float(total_success / total_w)
