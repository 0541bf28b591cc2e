"""Seeded property corpus: algebraic and differential identities.

One entry point, :func:`run_identities`, evaluates every identity family on
a randomized corpus (fixed seed, so results are reproducible) and returns
per-identity summaries.  The ``flip_divergence_sign`` hook deliberately
corrupts the codifferential convention; it exists as a negative control and
must make the affected identities fail.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chart import (
    CallableMetricOracle,
    FlatOracle,
    ProductMetricOracle,
    curvature_from_jet,
    divergence_sym2,
    FDSym2Field,
    fd_first_derivatives,
    fd_metric_jet,
    norm_covector,
    norm_sym2,
)
from .family import (
    FamilyParams,
    SurfaceProfileOracle,
    build_chart,
    round_sphere_profile,
)
from .forms import (
    CallableTwoFormField,
    Orientation,
    TwoForm,
    codifferential_two_ways,
    compose,
    hodge_star,
    inner,
    norm as form_norm,
    sd_asd_split,
)
from .residuals import leibniz_residual

__all__ = ["IdentityResult", "run_identities"]


@dataclass(frozen=True)
class IdentityResult:
    name: str
    max_residual: float
    tolerance: float
    passed: bool
    samples: int


def _perturbed_flat_oracle(rng: np.random.Generator, amplitude: float = 0.05):
    """Flat metric plus a random polynomial symmetric perturbation (degree 2)."""
    coeffs = rng.uniform(-1.0, 1.0, size=(4, 4, 15))
    coeffs = 0.5 * (coeffs + np.swapaxes(coeffs, 0, 1))

    def fn(x):
        monos = [
            1.0, x[0], x[1], x[2], x[3],
            x[0] * x[1], x[0] * x[2], x[0] * x[3],
            x[1] * x[2], x[1] * x[3], x[2] * x[3],
            x[0] * x[0], x[1] * x[1], x[2] * x[2], x[3] * x[3],
        ]
        rows = []
        for a in range(4):
            row = []
            for b in range(4):
                e = 1.0 if a == b else 0.0
                for k, m in enumerate(monos):
                    e = e + (amplitude * coeffs[a, b, k]) * m
                row.append(e)
            rows.append(row)
        return rows

    return CallableMetricOracle(fn, 4)


def _random_polynomial_field(rng: np.random.Generator) -> CallableTwoFormField:
    c = rng.uniform(-1.0, 1.0, size=(6, 5))

    def fn(x):
        return [
            c[k, 0] + c[k, 1] * x[0] + c[k, 2] * x[1] + c[k, 3] * x[2] * x[3]
            + c[k, 4] * x[0] * x[2]
            for k in range(6)
        ]

    return CallableTwoFormField(fn)


def _corpus(rng: np.random.Generator):
    """(name, oracle, sample points) triples for the identity checks."""
    chart = build_chart(FamilyParams(1, 2))
    fam_pts = chart.domain.sample_interior(rng, 8, pad=0.15)
    r2 = 1.0
    sphere = SurfaceProfileOracle(round_sphere_profile(r2), (-r2, r2))
    sphere2 = SurfaceProfileOracle(round_sphere_profile(r2), (-r2, r2))
    prod = ProductMetricOracle(sphere, sphere2)
    prod_pts = np.stack(
        [
            rng.uniform(-0.7, 0.7, 8),
            rng.uniform(0.0, 2 * math.pi, 8),
            rng.uniform(-0.7, 0.7, 8),
            rng.uniform(0.0, 2 * math.pi, 8),
        ],
        axis=-1,
    )
    flat_pts = rng.uniform(-0.5, 0.5, size=(8, 4))
    entries = [
        ("flat", FlatOracle(4), flat_pts, [1.0] * 4),
        ("kahler-product", chart.g_oracle, fam_pts, chart.domain.extents),
        ("conformal", chart.h_oracle, fam_pts, chart.domain.extents),
        ("round-product", prod, prod_pts, (2 * r2, 2 * math.pi, 2 * r2, 2 * math.pi)),
        ("perturbed-1", _perturbed_flat_oracle(rng), flat_pts, [1.0] * 4),
        ("perturbed-2", _perturbed_flat_oracle(rng), flat_pts, [1.0] * 4),
    ]
    return entries, chart


def run_identities(
    seed: int = 0,
    samples: int = 1000,
    flip_divergence_sign: bool = False,
) -> list[IdentityResult]:
    rng = np.random.default_rng(seed)
    orientation = Orientation()
    entries, chart = _corpus(rng)
    out = []

    # --- pointwise form algebra over random 2-forms, per corpus metric -----
    invol = split = orth = conf = comp_sd = comp_comm = comp_tracefree = comp_half = 0.0
    n_forms = 0
    for name, oracle, pts, _ in entries:
        g = oracle.metric(pts)
        batch = (samples // len(entries),) + g.shape[:-2]
        six = rng.uniform(-1.0, 1.0, size=batch + (6,))
        f = TwoForm(six)
        gb = np.broadcast_to(g, batch + g.shape[-2:])
        star = hodge_star(gb, orientation, f)
        invol = max(invol, float(np.max(np.abs(hodge_star(gb, orientation, star).six - f.six))))
        fp, fm = sd_asd_split(gb, orientation, f)
        split = max(split, float(np.max(np.abs(fp.six + fm.six - f.six))))
        orth = max(orth, float(np.max(np.abs(inner(fp, fm, gb)))))
        scale = rng.uniform(0.5, 2.0, size=batch)
        gb2 = scale[..., None, None] ** -2.0 * gb
        fp2, fm2 = sd_asd_split(gb2, orientation, f)
        conf = max(conf, float(np.max(np.abs(fp2.six - fp.six))))
        pp = compose(fp, fp, gb)
        half = pp + 0.5 * (form_norm(fp, gb) ** 2)[..., None, None] * gb
        comp_half = max(comp_half, float(np.max(np.abs(half))))
        pm = compose(fp, fm, gb)
        mp = compose(fm, fp, gb)
        comp_comm = max(comp_comm, float(np.max(np.abs(pm - mp))))
        tr = np.einsum("...ab,...ab->...", np.linalg.inv(gb), pm)
        asym = pm - np.swapaxes(pm, -1, -2)
        comp_tracefree = max(
            comp_tracefree, float(np.max(np.abs(tr))), float(np.max(np.abs(asym)))
        )
        ff0 = compose(f, f, gb)
        tr_ff = np.einsum("...ab,...ab->...", np.linalg.inv(gb), ff0)
        ff0 = ff0 - (tr_ff / 4.0)[..., None, None] * gb
        comp_sd = max(comp_sd, float(np.max(np.abs(ff0 - 2.0 * pm))))
        n_forms += batch[0] * int(np.prod(batch[1:], dtype=int))

    def add(name, value, tol, count):
        out.append(IdentityResult(name, value, tol, value < tol, count))

    add("star_involution", invol, 1e-12, n_forms)
    add("split_reassembles", split, 1e-12, n_forms)
    add("split_orthogonal", orth, 1e-12, n_forms)
    add("split_conformal_invariance", conf, 1e-12, n_forms)
    add("sd_compose_metric_multiple", comp_half, 1e-12, n_forms)
    add("sd_asd_compose_commute", comp_comm, 1e-12, n_forms)
    add("sd_asd_compose_trace_free", comp_tracefree, 1e-12, n_forms)
    add("trace_free_square_identity", comp_sd, 1e-12, n_forms)

    # --- Kahler form of the family: self-dual of norm sqrt(2) --------------
    fam_pts = chart.domain.sample_interior(rng, 32, pad=0.05)
    gj = chart.g_oracle.jet(fam_pts)
    om = chart.omega.value(fam_pts)
    om_dev = float(np.max(np.abs(hodge_star(gj, orientation, om).six - om.six)))
    om_norm = float(np.max(np.abs(form_norm(om, gj) - math.sqrt(2.0))))
    add("kahler_form_self_dual", om_dev, 1e-12, 32)
    add("kahler_form_norm_sqrt2", om_norm, 1e-12, 32)

    # --- differential identities over polynomial fields --------------------
    cod = leib = 0.0
    n_fields = 0
    field_metrics = [e for e in entries if e[0].startswith(("flat", "perturbed"))]
    per_metric = max(2, samples // 50 // len(field_metrics))
    for name, oracle, pts, _ in field_metrics:
        for _ in range(per_metric):
            field = _random_polynomial_field(rng)
            via_star, via_nabla = codifferential_two_ways(field, oracle, orientation, pts)
            if flip_divergence_sign:
                via_nabla = -via_nabla
            jref = oracle.jet(pts)
            cod = max(cod, float(np.max(norm_covector(via_star - via_nabla, jref.ginv))))
            lr = leibniz_residual(
                field, oracle, orientation, pts, flip_divergence_sign=flip_divergence_sign
            )
            leib = max(leib, float(np.max(lr)))
            n_fields += 1
    add("codifferential_two_routes", cod, 1e-7, n_fields)
    add("leibniz_divergence", leib, 1e-7, n_fields)

    # --- Bianchi: div ric0 = ds/4 on every corpus metric --------------------
    bianchi = 0.0
    for name, oracle, pts, extents in entries:
        ric0_field = FDSym2Field(
            lambda q, o=oracle: curvature_from_jet(o.jet(q)).ric0, extents=extents
        )
        div = divergence_sym2(ric0_field, oracle, pts)
        ds = fd_first_derivatives(
            lambda q, o=oracle: curvature_from_jet(o.jet(q)).s, pts, extents
        )
        jref = oracle.jet(pts)
        bianchi = max(bianchi, float(np.max(norm_covector(div - 0.25 * ds, jref.ginv))))
    add("bianchi_contracted", bianchi, 1e-6, len(entries) * 8)

    # --- Riemann symmetries (relative) --------------------------------------
    sym = 0.0
    for name, oracle, pts, _ in entries:
        bundle = curvature_from_jet(oracle.jet(pts))
        low = bundle.riem_low
        scale = max(float(np.max(np.abs(low))), 1.0)
        pair = np.abs(low - np.einsum("...abcd->...cdab", low))
        first = np.abs(
            low
            + np.einsum("...acdb->...abcd", low)
            + np.einsum("...adbc->...abcd", low)
        )
        skew = np.abs(low + np.einsum("...bacd->...abcd", low))
        sym = max(sym, float(np.max(pair) / scale), float(np.max(first) / scale),
                  float(np.max(skew) / scale))
    add("riemann_symmetries", sym, 1e-10, len(entries) * 8)

    # --- product block structure --------------------------------------------
    _, _, prod_pts, _ = entries[3]
    prod = entries[3][1]
    bundle = curvature_from_jet(prod.jet(prod_pts))
    cross = float(np.max(np.abs(bundle.ric[..., 0:2, 2:4])))
    b1 = curvature_from_jet(prod.factor1.jet(prod_pts[..., 0:2]))
    b2 = curvature_from_jet(prod.factor2.jet(prod_pts[..., 2:4]))
    additive = float(np.max(np.abs(bundle.s - b1.s - b2.s)))
    add("product_block_ricci", cross, 1e-10, 8)
    add("product_scalar_additive", additive, 1e-10, 8)

    # --- oracle consistency: jets vs Richardson finite differences ----------
    # sampled well inside the rectangle: near the profile zeros the sixth
    # derivative entering the FD truncation grows like W^-7
    cons = 0.0
    cons_pts = {
        "kahler-product": chart.domain.sample_interior(rng, 8, pad=0.25),
        "conformal": chart.domain.sample_interior(rng, 8, pad=0.25),
        "round-product": np.stack(
            [
                rng.uniform(-0.5, 0.5, 8),
                rng.uniform(0.0, 2 * math.pi, 8),
                rng.uniform(-0.5, 0.5, 8),
                rng.uniform(0.0, 2 * math.pi, 8),
            ],
            axis=-1,
        ),
    }
    for name, oracle, pts, extents in entries[1:]:
        pts = cons_pts.get(name, pts)
        jref = oracle.jet(pts)
        dg_fd, ddg_fd = fd_metric_jet(oracle, pts, extents)
        cons = max(
            cons,
            float(np.max(np.abs(jref.dg - dg_fd))),
            float(np.max(np.abs(jref.ddg - ddg_fd))),
        )
    add("oracle_fd_consistency", cons, 1e-7, (len(entries) - 1) * 8)

    return out
