"""Algebra of 2-forms on oriented Riemannian 4-charts.

Conventions (see CONVENTIONS.md for worked examples):

  * 2-forms are stored as 6-vectors over the ordered index pairs
    (01, 02, 03, 12, 23, 13), so antisymmetry is structural.
  * Volume form: eps_abcd = orientation.sign * sqrt(det g) * [abcd] with the
    reference coordinate order (0, 1, 2, 3).
  * Hodge star on 2-forms: (*F)_ab = 1/2 eps_ab^cd F_cd; an involution, and
    conformally invariant in dimension 4.
  * Split: F+- = 1/2 (F +- *F), so *F+ = F+ and *F- = -F-.
  * Norm: |F|^2 = 1/2 F_ab F^ab.  The associated 2-form of a metric then has
    pointwise norm sqrt(2), and its raised endomorphism squares to -identity.
  * Composition: (F o G)_jk = F_j^l G_lk, first factor's second index raised.
  * Exterior derivative (cyclic): (dF)_abc = d_a F_bc + d_b F_ca + d_c F_ab.
  * Codifferential: (delta F)_b = -g^ac nabla_c F_ab; with the conventions
    above this coincides with *d*F on 2-forms (sign verified in the tests).
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Callable, Sequence

import numpy as np

from .chart import MetricJet, christoffel, fd_first_derivatives
from .errors import NotJInvariant, SingularMetric

__all__ = [
    "SIX_PAIRS",
    "TwoForm",
    "ThreeForm",
    "Orientation",
    "TwoFormField",
    "ConstantTwoFormField",
    "CallableTwoFormField",
    "PointwiseTwoFormField",
    "hodge_star",
    "sd_asd_split",
    "compose",
    "inner",
    "norm",
    "exterior_derivative",
    "exterior_derivative_from_jet",
    "codifferential",
    "codifferential_two_ways",
    "star_field_jet",
    "asd_from_jinvariant",
    "jinvariance_residual",
    "almost_complex_checks",
]

# Fixed basis ordering for the 6 independent components of a 2-form.
SIX_PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (2, 3), (1, 3))

TRIPLES = ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3))


def _perm_symbol(n: int) -> np.ndarray:
    eps = np.zeros((n,) * n)
    for p in permutations(range(n)):
        sign = 1
        q = list(p)
        for i in range(n):
            while q[i] != i:
                j = q[i]
                q[i], q[j] = q[j], q[i]
                sign = -sign
        eps[p] = sign
    return eps


_PERM4 = _perm_symbol(4)


class TwoForm:
    """Antisymmetric 2-tensor at a point (batched allowed), stored as a 6-vector."""

    __slots__ = ("six",)

    def __init__(self, six: np.ndarray):
        self.six = np.asarray(six, dtype=float)
        if self.six.shape[-1] != 6:
            raise ValueError("a 2-form is stored as 6 components")

    @classmethod
    def from_matrix(cls, mat: np.ndarray) -> "TwoForm":
        mat = np.asarray(mat, dtype=float)
        skew = 0.5 * (mat - np.swapaxes(mat, -1, -2))
        six = np.stack([skew[..., a, b] for a, b in SIX_PAIRS], axis=-1)
        return cls(six)

    @property
    def mat(self) -> np.ndarray:
        out = np.zeros(self.six.shape[:-1] + (4, 4))
        for k, (a, b) in enumerate(SIX_PAIRS):
            out[..., a, b] = self.six[..., k]
            out[..., b, a] = -self.six[..., k]
        return out

    def __add__(self, other: "TwoForm") -> "TwoForm":
        return TwoForm(self.six + other.six)

    def __sub__(self, other: "TwoForm") -> "TwoForm":
        return TwoForm(self.six - other.six)

    def __mul__(self, scalar) -> "TwoForm":
        return TwoForm(self.six * np.asarray(scalar)[..., None])

    __rmul__ = __mul__

    def __neg__(self) -> "TwoForm":
        return TwoForm(-self.six)


class ThreeForm:
    """Antisymmetric 3-tensor, stored over the ordered triples (012, 013, 023, 123)."""

    __slots__ = ("comps",)

    def __init__(self, comps: np.ndarray):
        self.comps = np.asarray(comps, dtype=float)

    @property
    def arr(self) -> np.ndarray:
        out = np.zeros(self.comps.shape[:-1] + (4, 4, 4))
        for k, (a, b, c) in enumerate(TRIPLES):
            v = self.comps[..., k]
            for (i, jj, kk), sgn in _TRIPLE_PERMS:
                out[..., (a, b, c)[i], (a, b, c)[jj], (a, b, c)[kk]] = sgn * v
        return out


_TRIPLE_PERMS = tuple(
    (p, 1 if p in ((0, 1, 2), (1, 2, 0), (2, 0, 1)) else -1)
    for p in permutations(range(3))
)


@dataclass(frozen=True)
class Orientation:
    """Reference coordinate ordering and sign of the volume form."""

    sign: int = 1

    @classmethod
    def from_order(cls, order: Sequence[int]) -> "Orientation":
        sgn = int(round(_PERM4[tuple(order)]))
        if sgn == 0:
            raise ValueError("order must be a permutation of (0, 1, 2, 3)")
        return cls(sign=sgn)

    def volume_eps(self, g: np.ndarray) -> np.ndarray:
        """eps_abcd = sign * sqrt(det g) * [abcd]."""
        det = np.linalg.det(g)
        if np.any(det <= 0.0) or not np.all(np.isfinite(det)):
            raise SingularMetric("volume form needs a positive metric determinant")
        return self.sign * np.sqrt(det)[..., None, None, None, None] * _PERM4


def _ginv(g_or_jet) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(g_or_jet, MetricJet):
        return g_or_jet.g, g_or_jet.ginv
    g = np.asarray(g_or_jet, dtype=float)
    det = np.linalg.det(g)
    if np.any(det <= 0.0) or not np.all(np.isfinite(det)):
        raise SingularMetric("metric determinant is non-positive")
    return g, np.linalg.inv(g)


def hodge_star(g_or_jet, orientation: Orientation, f: TwoForm) -> TwoForm:
    """(*F)_ab = 1/2 eps_ab^cd F_cd."""
    g, ginv = _ginv(g_or_jet)
    eps = orientation.volume_eps(g)
    mat = 0.5 * np.einsum(
        "...abef,...ec,...fd,...cd->...ab", eps, ginv, ginv, f.mat
    )
    return TwoForm.from_matrix(mat)


def sd_asd_split(g_or_jet, orientation: Orientation, f: TwoForm) -> tuple[TwoForm, TwoForm]:
    """Self-dual and anti-self-dual parts, F = F+ + F-."""
    star = hodge_star(g_or_jet, orientation, f)
    return TwoForm(0.5 * (f.six + star.six)), TwoForm(0.5 * (f.six - star.six))


def compose(f: TwoForm, g_form: TwoForm, g_or_jet) -> np.ndarray:
    """(F o G)_jk = F_j^l G_lk with the index raised by the metric."""
    g, ginv = _ginv(g_or_jet)
    return np.einsum("...jm,...ml,...lk->...jk", f.mat, ginv, g_form.mat)


def inner(f: TwoForm, g_form: TwoForm, g_or_jet) -> np.ndarray:
    """<F, G> = 1/2 F_ab G^ab."""
    g, ginv = _ginv(g_or_jet)
    return 0.5 * np.einsum(
        "...ab,...cd,...ac,...bd->...", f.mat, g_form.mat, ginv, ginv
    )


def norm(f: TwoForm, g_or_jet) -> np.ndarray:
    return np.sqrt(np.maximum(inner(f, f, g_or_jet), 0.0))


# ---------------------------------------------------------------------------
# 2-form fields


class TwoFormField:
    """A 2-form varying over a chart, with jet access to its components."""

    def value(self, points) -> TwoForm:
        raise NotImplementedError

    def jet(self, points) -> tuple[TwoForm, np.ndarray]:
        """Return (F, dF) with dF[...,c,a,b] = d_c F_ab."""
        raise NotImplementedError


class ConstantTwoFormField(TwoFormField):
    def __init__(self, six: Sequence[float]):
        self.six = np.asarray(six, dtype=float)

    def value(self, points):
        pts = np.asarray(points, dtype=float)
        return TwoForm(np.broadcast_to(self.six, pts.shape[:-1] + (6,)).copy())

    def jet(self, points):
        pts = np.asarray(points, dtype=float)
        return self.value(points), np.zeros(pts.shape[:-1] + (4, 4, 4))


class CallableTwoFormField(TwoFormField):
    """Components given as formulas; exact jets through dual numbers.

    ``fn`` maps the seeded coordinate jets to 6 entries (Jet2 or constants)
    in the SIX_PAIRS basis order.
    """

    def __init__(self, fn: Callable):
        self.fn = fn

    def value(self, points):
        from . import jets as j2

        pts = np.asarray(points, dtype=float)
        comps = self.fn(j2.seed(pts))
        six = np.stack(
            [
                c.v if isinstance(c, j2.Jet2) else np.broadcast_to(float(c), pts.shape[:-1])
                for c in comps
            ],
            axis=-1,
        )
        return TwoForm(six)

    def jet(self, points):
        from . import jets as j2

        pts = np.asarray(points, dtype=float)
        batch = pts.shape[:-1]
        comps = self.fn(j2.seed(pts))
        six = np.zeros(batch + (6,))
        dmat = np.zeros(batch + (4, 4, 4))
        for k, c in enumerate(comps):
            a, b = SIX_PAIRS[k]
            if isinstance(c, j2.Jet2):
                six[..., k] = c.v
                dmat[..., :, a, b] = c.g
                dmat[..., :, b, a] = -c.g
            else:
                six[..., k] = c
        return TwoForm(six), dmat


class PointwiseTwoFormField(TwoFormField):
    """Field defined by a pointwise evaluator; jets by Richardson differences.

    The evaluator returns raw 6-component arrays.  Used for curvature-derived
    fields such as the constructed Maxwell field, where closed-form component
    derivatives would require third metric derivatives.
    """

    def __init__(self, fn: Callable, extents: Sequence[float], bounds=None):
        self.fn = fn
        self.extents = np.asarray(extents, dtype=float)
        self.bounds = bounds

    def value(self, points):
        return TwoForm(self.fn(np.asarray(points, dtype=float)))

    def jet(self, points):
        pts = np.asarray(points, dtype=float)
        dsix = fd_first_derivatives(self.fn, pts, self.extents, self.bounds)
        dmat = np.zeros(pts.shape[:-1] + (4, 4, 4))
        for k, (a, b) in enumerate(SIX_PAIRS):
            dmat[..., :, a, b] = dsix[..., :, k]
            dmat[..., :, b, a] = -dsix[..., :, k]
        return self.value(points), dmat


# ---------------------------------------------------------------------------
# Exterior derivative and codifferential


def exterior_derivative(field: TwoFormField, p) -> ThreeForm:
    """(dF)_abc of a 2-form field at p, cyclic sum over the component jet."""
    _, dmat = field.jet(np.asarray(p, dtype=float))
    return exterior_derivative_from_jet(dmat)


def exterior_derivative_from_jet(dmat: np.ndarray) -> ThreeForm:
    """(dF)_abc from the component jet dmat[...,c,a,b] = d_c F_ab (cyclic sum)."""
    comps = np.empty(dmat.shape[:-3] + (4,))
    for k, (a, b, c) in enumerate(TRIPLES):
        comps[..., k] = (
            dmat[..., a, b, c] + dmat[..., b, c, a] + dmat[..., c, a, b]
        )
    return ThreeForm(comps)


def three_form_norm(w: ThreeForm, g_or_jet) -> np.ndarray:
    g, ginv = _ginv(g_or_jet)
    arr = w.arr
    sq = (1.0 / 6.0) * np.einsum(
        "...abc,...def,...ad,...be,...cf->...", arr, arr, ginv, ginv, ginv
    )
    return np.sqrt(np.maximum(sq, 0.0))


def star_three_form(g_or_jet, orientation: Orientation, w: ThreeForm) -> np.ndarray:
    """1-form (*W)_a = 1/6 eps_a^bcd W_bcd."""
    g, ginv = _ginv(g_or_jet)
    eps = orientation.volume_eps(g)
    return (1.0 / 6.0) * np.einsum(
        "...aefg,...eb,...fc,...gd,...bcd->...a", eps, ginv, ginv, ginv, w.arr
    )


def star_field_jet(
    jet: MetricJet, orientation: Orientation, f: TwoForm, dmat: np.ndarray
) -> tuple[TwoForm, np.ndarray]:
    """Value and exact component jet of the field p -> *F(p).

    Product rule through the metric dependence of the star:
    d_e (*F)_ab = 1/2 [ d_e eps_ab^cd F_cd + eps_ab^cd d_e F_cd ].
    """
    g, ginv, dg = jet.g, jet.ginv, jet.dg
    eps_low = orientation.volume_eps(g)
    eps = np.einsum("...abef,...ec,...fd->...abcd", eps_low, ginv, ginv)
    # d_e sqrt(det g) = 1/2 sqrt(det g) tr(g^-1 d_e g), d_e g^-1 = -g^-1 (d_e g) g^-1
    tr = np.einsum("...mn,...enm->...e", ginv, dg)
    dginv = -np.einsum("...am,...emn,...nd->...ead", ginv, dg, ginv)
    deps = (
        0.5 * np.einsum("...e,...abcd->...eabcd", tr, eps)
        + np.einsum("...abmf,...emc,...fd->...eabcd", eps_low, dginv, ginv)
        + np.einsum("...abmf,...mc,...efd->...eabcd", eps_low, ginv, dginv)
    )
    star_mat = 0.5 * np.einsum("...abcd,...cd->...ab", eps, f.mat)
    dstar = 0.5 * (
        np.einsum("...eabcd,...cd->...eab", deps, f.mat)
        + np.einsum("...abcd,...ecd->...eab", eps, dmat)
    )
    return TwoForm.from_matrix(star_mat), dstar


def divergence_two_form(
    f: TwoForm, dmat: np.ndarray, jet: MetricJet, gamma: np.ndarray
) -> np.ndarray:
    """(div F)_b = g^ac nabla_c F_ab (contraction on the first form index)."""
    fm = f.mat
    nabla = (
        dmat
        - np.einsum("...eca,...eb->...cab", gamma, fm)
        - np.einsum("...ecb,...ae->...cab", gamma, fm)
    )
    return np.einsum("...ac,...cab->...b", jet.ginv, nabla)


def codifferential(
    field: TwoFormField, oracle, orientation: Orientation, p
) -> np.ndarray:
    """(delta F)_b = -g^ac nabla_c F_ab; equals *d*F under our conventions."""
    jet = oracle.jet(p)
    gamma = christoffel(jet)
    f, dmat = field.jet(p)
    return -divergence_two_form(f, dmat, jet, gamma)


def codifferential_two_ways(
    field: TwoFormField, oracle, orientation: Orientation, p
) -> tuple[np.ndarray, np.ndarray]:
    """The covariant-divergence route and the *d* route, for cross-checking."""
    jet = oracle.jet(p)
    gamma = christoffel(jet)
    f, dmat = field.jet(p)
    via_nabla = -divergence_two_form(f, dmat, jet, gamma)
    star_f, dstar = star_field_jet(jet, orientation, f, dmat)
    via_star = star_three_form(jet, orientation, exterior_derivative_from_jet(dstar))
    return via_star, via_nabla


# ---------------------------------------------------------------------------
# J-invariant symmetric tensors <-> anti-self-dual forms


def jinvariance_residual(s_val: np.ndarray, j_mat: np.ndarray, ginv: np.ndarray) -> np.ndarray:
    pulled = np.einsum("...cd,...ca,...db->...ab", s_val, j_mat, j_mat)
    diff = s_val - pulled
    sq = np.einsum("...ab,...cd,...ac,...bd->...", diff, diff, ginv, ginv)
    return np.sqrt(np.maximum(sq, 0.0))


def asd_from_jinvariant(
    g_or_jet, j_mat: np.ndarray, s_val: np.ndarray, tol: float = 1e-8
) -> TwoForm:
    """Solve S = phi(., J.) for the 2-form phi, given S trace-free J-invariant.

    The inverse is phi(X, Y) = -S(X, JY); for J-invariant trace-free input the
    result is anti-self-dual (verified by the test suite rather than assumed).
    Raises :class:`NotJInvariant` when the invariance residual exceeds ``tol``.
    """
    g, ginv = _ginv(g_or_jet)
    res = jinvariance_residual(s_val, j_mat, ginv)
    if np.any(res > tol):
        raise NotJInvariant(
            f"J-invariance residual {float(np.max(res)):.3e} exceeds {tol:.1e}"
        )
    phi = -np.einsum("...am,...mb->...ab", s_val, j_mat)
    return TwoForm.from_matrix(phi)


def almost_complex_checks(j_mat: np.ndarray, g: np.ndarray) -> tuple[float, float]:
    """Max deviations of J^2 + id and of g(J., J.) - g; both ~1e-12 for valid J."""
    sq = np.einsum("...ab,...bc->...ac", j_mat, j_mat)
    eye = np.broadcast_to(np.eye(4), sq.shape)
    dev1 = float(np.max(np.abs(sq + eye)))
    pulled = np.einsum("...cd,...ca,...db->...ab", g, j_mat, j_mat)
    dev2 = float(np.max(np.abs(pulled - g)))
    return dev1, dev2
