"""Signal-state catalogs for the two realistic photon sources.

Two source families are modeled, each replacing an ideal BB84 qubit with
the multiphoton state the hardware actually emits:

* ``wcp`` — a weak coherent pulse of amplitude ``alpha`` polarized along
  the basis/bit direction, expanded to first or second order in
  ``alpha`` (six Fock levels at second order);
* ``pdc`` — a downconversion pair source of amplitude ``chi`` whose
  two-arm emission is expanded to second order in ``chi``; the sender
  measures one arm and the receiver-bound state is the projected
  remainder.

Mode conventions follow :mod:`fockqkd.fock`: receiver-side states are
``(V, H)``; two-arm states are ``(sender-V, sender-H, receiver-V,
receiver-H)``.  Bit wiring is fixed so that bit 0 in the rectilinear
basis corresponds to a vertically polarized receiver photon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from fockqkd.fock import (
    FockVector,
    N_MAX_DEFAULT,
    Pattern,
    WeightedState,
    all_count_outcomes,
    normalize,
    rotate_modes,
)

SQ2 = math.sqrt(2.0)

BASES = ("+", "x")
WCP, PDC = "wcp", "pdc"

# Rotation angle applied to the measured/analyzed modes for the diagonal
# basis.  The sign is the one that maps the diagonal single-photon kets
# onto the counting modes (|V>+|H> -> |V>), locked by regression tests.
MEASUREMENT_ANGLE = {"+": 0.0, "x": -math.pi / 4}

# Polarization unit vectors (V, H components) used to *generate* states.
_POLARIZATION = {
    ("+", 0): (1.0, 0.0),
    ("+", 1): (0.0, 1.0),
    ("x", 0): (1 / SQ2, 1 / SQ2),
    ("x", 1): (1 / SQ2, -1 / SQ2),
}

# Sender-side detector wiring: the two arms of a pair source are
# anticorrelated, so detecting the H-polarized (rotated) photon heralds
# bit 0 at the receiver, and V heralds bit 1.
SENDER_BIT_FOR_DETECTED = {(0, 1): 0, (1, 0): 1}


class ParameterError(ValueError):
    """A source parameter is outside its allowed range."""


@dataclass(frozen=True)
class SourceParams:
    """Parameters of a signal source.

    Attributes:
        kind: ``"wcp"`` or ``"pdc"``.
        amplitude: the small expansion parameter (pulse amplitude for
            ``wcp``, pair amplitude for ``pdc``); must lie in (0, 1).
        expansion_order: 1 or 2, the highest retained power of the
            amplitude in the emitted kets.
        alice_detector_efficiency: per-photon detection probability of
            the sender's detectors (pair source only), in (0, 1].
    """

    kind: str
    amplitude: float
    expansion_order: int = 2
    alice_detector_efficiency: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in (WCP, PDC):
            raise ParameterError(f"unknown source kind {self.kind!r}")
        if not 0.0 < self.amplitude < 1.0:
            raise ParameterError("amplitude must lie strictly inside (0, 1)")
        if self.expansion_order not in (1, 2):
            raise ParameterError("expansion_order must be 1 or 2")
        if not 0.0 < self.alice_detector_efficiency <= 1.0:
            raise ParameterError("detector efficiency must lie in (0, 1]")


@dataclass(frozen=True)
class ModifiedQubit:
    """A labeled receiver-bound signal state.

    ``emission_probability`` is the per-pulse probability that the source
    actually launches this state (1 for a coherent pulse; the heralding
    probability for a pair source).
    """

    basis: str
    bit: int
    state: FockVector
    emission_probability: float


@dataclass(frozen=True)
class AliceOutcome:
    """One branch of the sender-side measurement.

    ``detected`` are the photon counts registered by the sender's two
    detectors (in the rotated frame); ``true_counts`` the photons that
    actually arrived there.  The two differ only when detector
    efficiency is below 1.  ``bob_state.weight`` is the joint probability
    of this branch; the branch is ``accepted`` when exactly one detector
    saw exactly one photon.
    """

    detected: Pattern
    true_counts: Pattern
    accepted: bool
    bit: int | None
    bob_state: WeightedState


def _check_basis_bit(basis: str, bit: int) -> None:
    if basis not in BASES:
        raise ParameterError(f"basis must be one of {BASES}, got {basis!r}")
    if bit not in (0, 1):
        raise ParameterError(f"bit must be 0 or 1, got {bit!r}")


def ideal_bb84_state(basis: str, bit: int, n_max: int = N_MAX_DEFAULT) -> FockVector:
    """The ideal single-photon BB84 ket for (basis, bit)."""
    _check_basis_bit(basis, bit)
    uv, uh = _POLARIZATION[(basis, bit)]
    return FockVector.from_terms(2, {(1, 0): uv, (0, 1): uh}, n_max=n_max)


def _n_photon_polarized(n: int, uv: float, uh: float) -> dict[Pattern, float]:
    """Amplitudes of |n photons polarized along (uv, uh)> in the V/H basis."""
    terms = {}
    for k in range(n + 1):
        amp = math.sqrt(math.comb(n, k)) * uv**k * uh ** (n - k)
        if amp != 0.0:
            terms[(k, n - k)] = amp
    return terms


def wcp_state(
    params: SourceParams,
    basis: str,
    bit: int,
    exact_coherent: bool = False,
    n_max: int = N_MAX_DEFAULT,
) -> ModifiedQubit:
    """The weak-coherent-pulse signal state for (basis, bit).

    By default the ket keeps the truncated expansion in the pulse
    amplitude: vacuum coefficient 1 - alpha^2/2, one-photon coefficient
    alpha, and (at order 2) two-photon coefficient alpha^2/sqrt(2), all
    in the pulse's polarization mode.  With ``exact_coherent`` the full
    Poissonian amplitude ladder up to ``n_max`` is kept instead — a
    sensitivity diagnostic, not the default model.
    """
    if params.kind != WCP:
        raise ParameterError("wcp_state requires a wcp source")
    _check_basis_bit(basis, bit)
    alpha = params.amplitude
    uv, uh = _POLARIZATION[(basis, bit)]
    if exact_coherent:
        coeffs = [
            math.exp(-(alpha**2) / 2.0) * alpha**n / math.sqrt(math.factorial(n))
            for n in range(n_max + 1)
        ]
    else:
        coeffs = [1.0 - alpha**2 / 2.0, alpha]
        if params.expansion_order == 2:
            coeffs.append(alpha**2 / SQ2)
    amps: dict[Pattern, complex] = {}
    for n, c in enumerate(coeffs):
        for pattern, a in _n_photon_polarized(n, uv, uh).items():
            amps[pattern] = amps.get(pattern, 0.0) + c * a
    unit, _ = normalize(FockVector.from_terms(2, amps, n_max=n_max))
    return ModifiedQubit(basis=basis, bit=bit, state=unit, emission_probability=1.0)


def pdc_modified_singlet(params: SourceParams, n_max: int = N_MAX_DEFAULT) -> FockVector:
    """Two-arm emission of the pair source, expanded to second order.

    The state is returned un-normalized, exactly as expanded: the
    deliberate O(amplitude^2) truncation leaves a squared norm of
    1 + (5/4) chi^4.  At ``expansion_order`` 1 the second-order bracket
    is dropped and only the vacuum and single-pair terms remain.
    """
    if params.kind != PDC:
        raise ParameterError("pdc_modified_singlet requires a pdc source")
    chi = params.amplitude
    half = chi / 2.0
    quarter = chi**2 / 4.0
    terms: dict[Pattern, float] = {(0, 0, 0, 0): 1.0 - chi**2 / 2.0}
    # single-pair bracket: the two photons of a pair split across the
    # arms (antisymmetric combination) or bunch into one arm
    for pattern, sign in {
        (0, 1, 1, 0): +1.0,
        (1, 1, 0, 0): +1.0,
        (0, 0, 1, 1): -1.0,
        (1, 0, 0, 1): -1.0,
    }.items():
        terms[pattern] = sign * half
    if params.expansion_order == 2:
        for pattern, factor in {
            (0, 2, 2, 0): +1.0,
            (2, 2, 0, 0): +1.0,
            (0, 0, 2, 2): +1.0,
            (2, 0, 0, 2): +1.0,
            (1, 1, 1, 1): -2.0,
            (1, 0, 1, 2): +SQ2,
            (0, 1, 2, 1): -SQ2,
            (1, 2, 1, 0): +SQ2,
            (2, 1, 0, 1): -SQ2,
        }.items():
            terms[pattern] = factor * quarter
    return FockVector.from_terms(4, terms, n_max=n_max)


def alice_measure(
    singlet: FockVector,
    basis: str,
    params: SourceParams,
    rng: np.random.Generator | None = None,
) -> list[AliceOutcome] | AliceOutcome:
    """Measure the sender's two modes of a two-arm state.

    Rotates the sender's modes (angle 0 for the rectilinear basis,
    -pi/4 for the diagonal one), enumerates all photon-count outcomes,
    and — when the sender's detector efficiency is below 1 — splits each
    true count pattern over the detected patterns it can produce via
    independent per-photon Bernoulli detection (no dark counts).  A
    branch is accepted when the detected counts are (1, 0) or (0, 1);
    the heralded bit is 0 for the rotated-H detector and 1 for
    rotated-V.  Branch probabilities sum to 1.

    With ``rng`` given, a single branch is sampled from the distribution
    instead of returning the full list.
    """
    if singlet.mode_count != 4:
        raise ParameterError("sender measurement expects a 4-mode state")
    if basis not in BASES:
        raise ParameterError(f"basis must be one of {BASES}")
    eta = params.alice_detector_efficiency
    rotated = rotate_modes(singlet, 0, 1, MEASUREMENT_ANGLE[basis])
    outcomes: list[AliceOutcome] = []
    for true_counts, branch in all_count_outcomes(rotated, (0, 1)):
        if branch.state is None:
            continue
        tv, th = true_counts
        if eta == 1.0:
            detected_split = [((tv, th), 1.0)]
        else:
            detected_split = []
            for dv in range(tv + 1):
                pv = math.comb(tv, dv) * eta**dv * (1 - eta) ** (tv - dv)
                for dh in range(th + 1):
                    ph = math.comb(th, dh) * eta**dh * (1 - eta) ** (th - dh)
                    detected_split.append(((dv, dh), pv * ph))
        for detected, split_prob in detected_split:
            if split_prob == 0.0:
                continue
            accepted = detected in SENDER_BIT_FOR_DETECTED
            bit = SENDER_BIT_FOR_DETECTED.get(detected)
            outcomes.append(
                AliceOutcome(
                    detected=detected,
                    true_counts=true_counts,
                    accepted=accepted,
                    bit=bit,
                    bob_state=WeightedState(branch.state, branch.weight * split_prob),
                )
            )
    if rng is None:
        return outcomes
    weights = np.array([o.bob_state.weight for o in outcomes])
    choice = rng.choice(len(outcomes), p=weights / weights.sum())
    return outcomes[int(choice)]


def pdc_qubit(params: SourceParams, basis: str, bit: int) -> ModifiedQubit:
    """The heralded receiver-bound state of the pair source.

    Convenience wrapper: runs the sender measurement with perfect
    detectors and returns the accepted branch carrying (basis, bit).
    The emission probability is the branch probability, approximately
    amplitude^2 / 4 per (basis, bit).
    """
    if params.kind != PDC:
        raise ParameterError("pdc_qubit requires a pdc source")
    _check_basis_bit(basis, bit)
    perfect = SourceParams(
        kind=PDC,
        amplitude=params.amplitude,
        expansion_order=params.expansion_order,
        alice_detector_efficiency=1.0,
    )
    singlet = pdc_modified_singlet(perfect)
    for outcome in alice_measure(singlet, basis, perfect):
        if outcome.accepted and outcome.bit == bit:
            return ModifiedQubit(
                basis=basis,
                bit=bit,
                state=outcome.bob_state.state,
                emission_probability=outcome.bob_state.weight,
            )
    raise ParameterError(f"no accepted branch for basis={basis} bit={bit}")


def signal_states(params: SourceParams) -> list[ModifiedQubit]:
    """The four signal states in fixed order (+0, +1, x0, x1)."""
    maker = wcp_state if params.kind == WCP else pdc_qubit
    return [maker(params, basis, bit) for basis in BASES for bit in (0, 1)]


def ideal_signal_states(n_max: int = N_MAX_DEFAULT) -> list[ModifiedQubit]:
    """The four ideal single-photon signal states (diagnostic catalog)."""
    return [
        ModifiedQubit(basis, bit, ideal_bb84_state(basis, bit, n_max), 1.0)
        for basis in BASES
        for bit in (0, 1)
    ]


def pdc_accepted_branches(
    params: SourceParams, basis: str
) -> list[tuple[int, WeightedState]]:
    """All accepted sender-measurement branches for one basis.

    With perfect sender detectors this is exactly the two heralded
    states; with efficiency below 1 extra branches appear (a multiphoton
    arrival read as a single click), which is what breaks the two-
    dimensional structure of the heralded catalog.  Returned as
    (bit, weighted state) pairs.
    """
    singlet = pdc_modified_singlet(params)
    return [
        (o.bit, o.bob_state)
        for o in alice_measure(singlet, basis, params)
        if o.accepted
    ]
