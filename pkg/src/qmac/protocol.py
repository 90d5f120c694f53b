"""Exact simulation of the singlet-keyed one-bit authentication protocol.

Subsystem ordering is key-A (2) ⊗ key-B (2) ⊗ message E (4); a basis state
has index ``8a + 4b + e``.  The message basis is fixed to the computational
basis e0..e3 of the 4-dim message space: bit states are e0/e1, reject
outcomes e2/e3.  Arbitrary orthonormal message bases are supported by
conjugating the tagging unitary at load time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .linalg import dagger, is_unitary, partial_trace, tensor

I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)

#: Columns are the message-basis vectors |phi_0..3>.
MESSAGE_BASIS = np.eye(4, dtype=complex)

#: Accept projector onto span{|phi_0>, |phi_1>}.
ACCEPT_PROJECTOR = np.diag([1, 1, 0, 0]).astype(complex)


def singlet() -> np.ndarray:
    """Two-qubit singlet key (|01> - |10>)/sqrt(2) on A ⊗ B."""
    psi = np.zeros(4, dtype=complex)
    psi[1] = 1 / np.sqrt(2)
    psi[2] = -1 / np.sqrt(2)
    return psi


class TaggingUnitary:
    """The public 4×4 tagging operation with block/row/column accessors.

    Blocks are numbered row-major: block 0 = top-left, 1 = top-right,
    2 = bottom-left, 3 = bottom-right.  ``row(i, j)`` is row j of block i;
    ``col(i, j)`` is column j of block i.
    """

    def __init__(self, u: np.ndarray, tol: Tolerances = DEFAULT_TOL):
        u = np.asarray(u, dtype=complex)
        if u.shape != (4, 4):
            raise ValueError(f"tagging unitary must be 4x4, got {u.shape}")
        ok, dev = is_unitary(u, tol.unitary)
        if not ok:
            raise ValueError(f"matrix is not unitary (deviation {dev:.3e})")
        self._u = u.copy()
        self._u.setflags(write=False)
        self.unitarity_deviation = dev
        # Controlled encode/decode operators on the 16-dim joint space.
        p0 = np.diag([1, 0]).astype(complex)
        p1 = np.diag([0, 1]).astype(complex)
        self.encode_op = tensor(p0, I2, I4) + tensor(p1, I2, u)
        self.decode_op = tensor(I2, p0, dagger(u)) + tensor(I2, p1, I4)

    @property
    def u(self) -> np.ndarray:
        return self._u

    def block(self, i: int) -> np.ndarray:
        if i not in (0, 1, 2, 3):
            raise ValueError("block index must be 0..3")
        r, c = divmod(i, 2)
        return self._u[2 * r:2 * r + 2, 2 * c:2 * c + 2]

    def row(self, i: int, j: int) -> np.ndarray:
        """Row j of the 2x2 block i."""
        return self.block(i)[j, :]

    def col(self, i: int, j: int) -> np.ndarray:
        """Column j of block i."""
        return self.block(i)[:, j]


def as_tagging_unitary(u, tol: Tolerances = DEFAULT_TOL) -> TaggingUnitary:
    return u if isinstance(u, TaggingUnitary) else TaggingUnitary(u, tol)


@dataclass(frozen=True)
class RunRecord:
    """Outcome of one honest protocol round."""

    message_sent: int
    outcome: int
    accepted: bool
    decoded_bit: Optional[int]
    key_fidelity_after: float

    def to_json(self) -> dict:
        return {
            "message": self.message_sent,
            "outcome": self.outcome,
            "accepted": self.accepted,
            "decoded": self.decoded_bit,
            "key_fidelity": self.key_fidelity_after,
        }


def joint_state(key: np.ndarray, message_state: np.ndarray) -> np.ndarray:
    """Compose a 16-dim joint state from a 4-dim key and 4-dim message."""
    return tensor(key, message_state)


def encode(u, message: int) -> np.ndarray:
    """Alice's tagging operation applied to singlet ⊗ |phi_message>.

    Returns (|01>|phi_i> - |10> U|phi_i>)/sqrt(2).
    """
    u = as_tagging_unitary(u)
    if message not in (0, 1):
        raise ValueError("message must be 0 or 1")
    state = joint_state(singlet(), MESSAGE_BASIS[:, message])
    return u.encode_op @ state


def decode(u, state: np.ndarray) -> np.ndarray:
    """Bob's decoding operation, controlled on his key qubit."""
    u = as_tagging_unitary(u)
    state = np.asarray(state, dtype=complex)
    if state.shape != (16,):
        raise ValueError("joint state must be a 16-dim vector")
    return u.decode_op @ state


def channel_density(u, message: int) -> np.ndarray:
    """Density operator of the in-flight message: (rho_i + U rho_i U†)/2."""
    u = as_tagging_unitary(u)
    if message not in (0, 1):
        raise ValueError("message must be 0 or 1")
    phi = MESSAGE_BASIS[:, message]
    rho = np.outer(phi, phi.conj())
    return (rho + u.u @ rho @ dagger(u.u)) / 2


def channel_density_classical(u, message: int) -> np.ndarray:
    """Channel state averaged over the degenerate classical-bit-key mode.

    With a uniformly random classical key bit, Alice either sends |phi_i>
    unchanged or applies U; the ensemble average must agree with
    :func:`channel_density`.
    """
    u = as_tagging_unitary(u)
    phi = MESSAGE_BASIS[:, message]
    branches = [phi, u.u @ phi]
    return sum(np.outer(b, b.conj()) for b in branches) / 2


def measurement_distribution(state: np.ndarray) -> np.ndarray:
    """Outcome probabilities of Bob's projective message measurement."""
    amps = np.asarray(state, dtype=complex).reshape(4, 4)
    return (np.abs(amps) ** 2).sum(axis=0)


def bob_measure(state: np.ndarray, rng: np.random.Generator):
    """Born-rule sample of the 4-outcome message measurement.

    Returns ``(outcome, accepted, post_state)`` with the post-measurement
    joint state renormalized.
    """
    state = np.asarray(state, dtype=complex)
    probs = measurement_distribution(state)
    outcome = int(rng.choice(4, p=probs / probs.sum()))
    post = state.reshape(4, 4).copy()
    mask = np.zeros(4, dtype=bool)
    mask[outcome] = True
    post[:, ~mask] = 0
    post = post.reshape(16)
    post = post / np.linalg.norm(post)
    return outcome, outcome in (0, 1), post


def key_fidelity(state: np.ndarray) -> float:
    """Overlap of the reduced key state with the singlet."""
    state = np.asarray(state, dtype=complex)
    rho_key = partial_trace(np.outer(state, state.conj()), [2, 2, 4], keep={0, 1})
    psi = singlet()
    return float(np.real(psi.conj() @ rho_key @ psi))


def run_honest(u, message: int, rng: np.random.Generator) -> RunRecord:
    """One full honest round: encode, decode, measure."""
    u = as_tagging_unitary(u)
    decoded = decode(u, encode(u, message))
    outcome, accepted, post = bob_measure(decoded, rng)
    return RunRecord(
        message_sent=message,
        outcome=outcome,
        accepted=accepted,
        decoded_bit=outcome if accepted else None,
        key_fidelity_after=key_fidelity(post),
    )


def simulate_honest_batch(u, message: int, trials: int, rng: np.random.Generator):
    """Sample ``trials`` honest-round outcomes efficiently.

    The decoded state is the same every round, so the per-trial work is a
    single Born sample from its outcome distribution.
    """
    u = as_tagging_unitary(u)
    decoded = decode(u, encode(u, message))
    probs = measurement_distribution(decoded)
    fid = key_fidelity(decoded)
    if trials == 0:
        return np.zeros(0, dtype=int), fid
    outcomes = rng.choice(4, size=trials, p=probs / probs.sum())
    return outcomes, fid
