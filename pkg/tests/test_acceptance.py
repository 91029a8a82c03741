"""Acceptance criteria 1-10.  Each test records one PASS/FAIL line that the
conftest hook prints at the end of the run, with its wall time and budget."""

import numpy as np

from svpc.certify import NOT_SVPC, SVPC, compose, is_svpc, steigmann_check, supporting_hyperplane
from svpc.conjugate import (
    ConjugationConfig,
    adaptive_beta_grid,
    auto_beta_grid,
    cross_check,
    default_tolerances,
    envelope_details,
    sv_conjugate,
    sv_envelope,
)
from svpc.gridfn import GridFunction, GridSpec, build, midpoint_convexity_check
from svpc.lifting import lift, project
from svpc.matkit import minors, sample_rotations
from svpc.models import PSI_LIBRARY, catalog, get_model
from svpc.symmetry import apply, embed, enumerate_group, lambda_support, lambda_support_many
from svpc.symmetry import lifted_rotation_value_direct, lifted_rotation_values

NU2 = GridSpec.uniform("nu", 2, 2.0, 41)


def adaptive(phi):
    return ConjugationConfig(phi.spec, adaptive_beta_grid(phi))


def interior(spec):
    return ~spec.boundary_mask()


def test_criterion_01_lifting_identity(criterion):
    with criterion(1, "lifting identity project(minors(diag nu)) = lift(nu)", 1.0) as c:
        rng = np.random.default_rng(101)
        for d in (2, 3):
            nus = rng.normal(scale=2.0, size=(10_000, d))
            bad = sum(not np.array_equal(project(minors(np.diag(v))), lift(v)) for v in nus)
            assert bad == 0, f"d={d}: {bad} mismatches"
        c.note("2 x 10^4 points, exact equality")


def test_criterion_02_group(criterion):
    with criterion(2, "group order, closure, sign product +1, product preservation", 1.0) as c:
        rng = np.random.default_rng(102)
        for d, order in ((2, 4), (3, 24)):
            G = enumerate_group(d)
            assert len(G) == order
            members = set(G)
            assert all(S.compose(T) in members for S in G for T in G)
            assert all(S.inverse() in members for S in G)
            assert all(np.prod(S.signs) == 1 for S in G)
            nus = rng.normal(size=(1000, d))
            p = np.prod(nus, axis=1)
            for S in G:
                assert np.allclose(np.prod(apply(S, nus), axis=1), p, rtol=1e-14, atol=0)
        c.note("|P2|=4, |P3|=24")


def test_criterion_03_rotation_reduction(criterion):
    with criterion(3, "rotation sup equals the group maximum", 120.0) as c:
        rng = np.random.default_rng(103)
        worst_excess, worst_eq = -np.inf, 0.0
        for d in (2, 3):
            k = 3 if d == 2 else 7
            G = enumerate_group(d)
            emb = [embed(S) for S in G]
            for _ in range(100):
                beta = rng.normal(size=k)
                nu = rng.normal(scale=1.5, size=d)
                lam = lambda_support(beta, nu)
                R1 = sample_rotations(d, 10_000, rng)
                R2 = sample_rotations(d, 10_000, rng)
                top = float(np.max(lifted_rotation_values(beta, nu, R1, R2)))
                worst_excess = max(worst_excess, top - lam)
                assert top <= lam + 1e-9
                direct = max(lifted_rotation_value_direct(beta, nu, A, B) for A, B in emb)
                worst_eq = max(worst_eq, abs(direct - lam))
                assert abs(direct - lam) <= 1e-12
        c.note(f"max excess {worst_excess:.2e}, max |direct - Lambda| {worst_eq:.1e}")


def test_criterion_04_conjugation_laws(criterion):
    with criterion(4, "conjugation laws on nu 41^2 / beta 17^3", 60.0) as c:
        nu = GridSpec.uniform("nu", 2, 3.0, 41)
        cfg = ConjugationConfig(nu, GridSpec.uniform("beta", 3, 4.0, 17))
        bump = build(nu, lambda v: 0.1 * (v[:, 0] ** 2 + v[:, 1] ** 2) + 0.05, vectorized=True)
        worst = 0.0
        for name in ("double_well", "st_venant_kirchhoff", "concave", "det_barrier", "lifted_convex"):
            f = get_model(name, 2).sample(nu)
            g = GridFunction(nu, f.values + bump.values)
            df, dg = envelope_details(f, cfg), envelope_details(g, cfg)
            fin = f.finite
            assert np.all(df.values[fin] <= f.values[fin] + 1e-12), name
            assert np.all(df.conjugate.result.values >= dg.conjugate.result.values), name
            assert np.all(df.values <= dg.values + 1e-12), name
            f3 = sv_conjugate(df.envelope.result, cfg.beta_grid)
            diff = float(np.max(np.abs(f3.values - df.conjugate.result.values)))
            worst = max(worst, diff)
            assert diff <= 1e-9, name
            for conj in (df.conjugate.result, dg.conjugate.result, f3):
                assert midpoint_convexity_check(conj, tol=1e-9)[0], name
        c.note(f"5 models, max |f*** - f*| {worst:.1e}")


def test_criterion_05_fixed_points(criterion):
    with criterion(5, "lifted affine/convex fixed points", 120.0) as c:
        rng = np.random.default_rng(105)
        ct, _ = default_tolerances(NU2)
        inner = interior(NU2)
        worst = [0.0, 0.0, 0.0]
        for i in range(20):
            if i < 10:
                params = {"beta": [0.0, 0.0, float(rng.uniform(-2, 2))], "offset": float(rng.uniform(-1, 1))}
                phi = get_model("lifted_affine", 2, params).sample(NU2)
            else:
                params = {"a": float(rng.uniform(0.1, 2)), "c": float(rng.uniform(0, 1)),
                          "e": float(rng.uniform(-1, 1)), "offset": float(rng.uniform(-1, 1))}
                phi = get_model("lifted_convex", 2, params).sample(NU2)
            cfg = adaptive(phi)
            env = sv_envelope(phi, cfg)
            gaps = [
                float(np.max(np.abs(env.values - phi.values)[inner])),
                float(np.max(np.abs(sv_conjugate(env, cfg.beta_grid).values - sv_conjugate(phi, cfg.beta_grid).values))),
                float(np.max(np.abs(sv_envelope(env, cfg).values - env.values))),
            ]
            worst = [max(a, b) for a, b in zip(worst, gaps)]
            assert gaps[0] <= ct and gaps[1] <= 1e-8 and gaps[2] <= ct, (i, params, gaps)
        c.note(f"20 models, env-phi {worst[0]:.1e}, conj {worst[1]:.1e}, idem {worst[2]:.1e}; certify_tol {ct:.2g}")


def test_criterion_06_round_trip(criterion):
    with criterion(6, "known-svpc models certify, concave and SVK refuted", 300.0) as c:
        yes = [m for m in catalog(2) if m.known_svpc == "yes"]
        for m in yes:
            phi = m.sample(NU2)
            cert = is_svpc(phi, adaptive(phi))
            assert cert.verdict == SVPC, (m.name, cert.verdict, cert.max_gap)
        rng = np.random.default_rng(106)
        values = np.arange(-1.5, 1.75, 0.25)
        for _ in range(10):
            beta = rng.choice(values, size=3)
            phi = GridFunction(NU2, lambda_support_many(beta, NU2.nodes()))
            cert = is_svpc(phi, adaptive(phi))
            assert cert.verdict == SVPC, (beta, cert.verdict, cert.max_gap)
        for name in ("concave", "st_venant_kirchhoff"):
            phi = get_model(name, 2).sample(NU2)
            cert = is_svpc(phi, adaptive(phi))
            assert cert.verdict == NOT_SVPC, (name, cert.verdict)
            assert cert.witness_node is not None and cert.lp_value is not None
            target = phi.values[NU2.index_of(cert.witness_node)]
            assert target - cert.lp_value > cert.refute_margin
            c.note(f"{name} witness {cert.witness_node} gap {cert.witness_gap:.3g} LP {cert.lp_value:.3g}")
        c.note(f"{len(yes)} catalog models and 10 Lambda_beta certified")


def test_criterion_07_primal_dual(criterion):
    with criterion(7, "primal/dual envelope agreement at 25 interior nodes", 120.0) as c:
        rng = np.random.default_rng(107)
        ct, _ = default_tolerances(NU2)
        for name in ("double_well", "st_venant_kirchhoff"):
            phi = get_model(name, 2).sample(NU2)
            idx = rng.choice(np.flatnonzero(interior(NU2)), size=25, replace=False)
            rep = cross_check(phi, adaptive(phi), NU2.nodes()[np.sort(idx)])
            assert rep["max_abs_diff"] <= 10 * ct and rep["max_dual_excess"] <= ct and not rep["violations"], name
            c.note(f"{name}: max|diff| {rep['max_abs_diff']:.2e}, dual excess {rep['max_dual_excess']:.1e}")


def _e_grid(d):
    return GridSpec.uniform("e", d, 4.0, 17) if d == 2 else GridSpec.uniform("e", 3, 3.0, 9)


def test_criterion_08_invariant_criterion(criterion):
    with criterion(8, "convex symmetric psi certify; psi = e1 fails symmetry", 120.0) as c:
        cases = [("quadratic", 2), ("quartic", 2), ("abs", 2), ("cosh", 2), ("quadratic", 3)]
        for name, d in cases:
            assert d in PSI_LIBRARY[name][0]
            m = get_model("invariant_model", d, {"psi": name})
            samples = build(_e_grid(d), m.psi)
            rep = steigmann_check(samples, psi=m.psi)
            assert rep["criterion_satisfied"], (name, d, rep["convexity_worst"], rep["symmetry_worst"])
            # d=3: slopes grow like |nu|^2, so a 9^7 slope grid resolves [-1, 1]^3 only
            nu = NU2 if d == 2 else GridSpec.uniform("nu", 3, 1.0, 9)
            phi = compose(m.psi, nu)
            cfg = adaptive(phi) if d == 2 else ConjugationConfig(nu, auto_beta_grid(phi))
            cert = is_svpc(phi, cfg)
            assert cert.verdict == SVPC, (name, d, cert.verdict, cert.max_gap)
        tr = get_model("invariant_model", 2, {"psi": "trace"})
        rep = steigmann_check(build(_e_grid(2), tr.psi), psi=tr.psi)
        assert not rep["symmetric"] and not rep["criterion_satisfied"]
        c.note(f"5 psi certified; e1 symmetry defect {rep['symmetry_worst']:.3g}")


def test_criterion_09_extended_real(criterion):
    with criterion(9, "det barrier: finite conjugate, envelope <= phi, hyperplane level", 60.0) as c:
        phi = get_model("det_barrier", 2).sample(NU2)
        cfg = adaptive(phi)
        det = envelope_details(phi, cfg)
        assert np.all(np.isfinite(det.conjugate.result.values))
        assert np.all(det.values <= phi.values + 1e-12)
        wide = ConjugationConfig(NU2, GridSpec.uniform("beta", 3, 16.0, 5))
        nu0 = np.array([1.0, -1.0])
        assert phi.values[NU2.index_of(nu0)] == np.inf
        hp = supporting_hyperplane(phi, nu0, 0.1, wide)
        assert hp.level >= 10.0
        hp.verify(phi)
        c.note(f"{int(np.sum(~phi.finite))} infinite nodes, level {hp.level:.3g} at {nu0.tolist()}")


def test_criterion_10_d3_smoke(criterion):
    with criterion(10, "d=3 smoke: lifted_affine on nu 9^3 / beta 7^7", 600.0) as c:
        nu = GridSpec.uniform("nu", 3, 2.0, 9)
        beta = GridSpec.uniform("beta", 7, 3.0, 7)
        phi = get_model("lifted_affine", 3).sample(nu)
        env = sv_envelope(phi, ConjugationConfig(nu, beta))
        ct, _ = default_tolerances(nu)
        dev = float(np.max(np.abs(env.values - phi.values)[interior(nu)]))
        assert dev <= ct
        c.note(f"{beta.size} slope nodes, max interior deviation {dev:.1e} (certify_tol {ct:.3g})")
