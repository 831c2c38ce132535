//! The experiment pipelines behind each experiment id.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{BumpConfig, ExperimentConfig, ExperimentId, KernelConfig, PseudoConfig};
use super::fit::fit_rate;
use super::report::Report;
use crate::error::{Error, Result};
use crate::first_quantized::{
    aligned_times, discretization_baseline, graph_residual, trotter_kato_sup_error, JumpFunctionSpec,
};
use crate::fock::operators::OneParticleOperator;
use crate::fock::pseudo::{point_annihilation, Coord};
use crate::fock::space::exponential_tail;
use crate::fock::{
    apply_annihilation, apply_creation, boundary_residual, jump_annihilation, pseudo_exponential,
    second_quantize_contraction, FockVector, PseudoExponentialSpec, TruncatedFockSpace,
};
use crate::linalg::{c, identity, max_abs_diff, CMatrix, CVector, C64, I};
use crate::mollifier::{autocorrelation, bump_kernel, kappas, pair_continuum, Evaluate, Grid, GridFunction, Kernel, OneSided};
use crate::profile::{Profile, Side};
use crate::qsde::{
    bump_with_norm, cocycle_residual, solve_matrix_element_with, vacuum_matrix_element, weak_convergence_error, TestFunctionPair,
};
use crate::slh::{
    check_unitarity, coefficient_matrix_from_slh, random_e_matrix, scattering_from_kappa, slh_from_e,
    solve_stratonovich_to_ito, CoefficientMatrix, EMatrix, SLHTriple,
};

fn grid_of(cfg: &ExperimentConfig, half_length: f64, n: usize) -> Result<Grid> {
    let (l, n) = cfg.grid.map_or((half_length, n), |g| (g.half_length, g.n));
    Grid::new(l, n).map_err(|e| Error::Config(format!("grid: {e}")))
}

fn kernel_of(kc: &KernelConfig) -> Result<Kernel> {
    bump_kernel(kc.halfwidth, kc.center, kc.omega)
}

fn space_of(grid: Grid, trunc: usize, d: usize) -> Result<TruncatedFockSpace> {
    TruncatedFockSpace::new(grid, trunc, d).map_err(|e| Error::Config(format!("truncated space: {e}")))
}

/// Triple from `E`, with any configured overrides applied.
fn triple_of(cfg: &ExperimentConfig, e: &EMatrix) -> Result<SLHTriple> {
    let mut t = slh_from_e(e)?;
    if let Some(o) = &cfg.model.overrides {
        if let Some(s) = &o.s {
            t.s = s.matrix()?;
        }
        if let Some(l) = &o.l {
            t.l = l.matrix()?;
        }
        if let Some(h) = &o.h {
            t.h = h.matrix()?;
        }
        t = SLHTriple::new(t.s, t.l, t.h)?;
    }
    if t.dim() != e.dim() {
        return Err(Error::Config("override dimension differs from the model".into()));
    }
    Ok(t)
}

fn unit_vector(d: usize) -> CVector {
    CVector::from_element(d, c(1.0 / (d as f64).sqrt(), 0.0))
}

fn test_pair(cfg: &ExperimentConfig) -> Result<TestFunctionPair> {
    let default = (
        BumpConfig {
            center: 0.3,
            halfwidth: 0.3,
            norm: Some(0.5),
            amplitude: None,
        },
        BumpConfig {
            center: 0.1,
            halfwidth: 0.35,
            norm: Some(0.4),
            amplitude: None,
        },
    );
    let (p, q) = cfg.test_functions.map_or(default, |t| (t.phi, t.psi));
    let prof = |b: BumpConfig| -> Result<Profile> {
        match (b.norm, b.amplitude) {
            (Some(n), None) => Ok(bump_with_norm(b.center, b.halfwidth, n)),
            (None, Some(a)) => Ok(Profile::bump(b.center, b.halfwidth, c(a, 0.0))),
            _ => Err(Error::Config("test functions need exactly one of norm or amplitude".into())),
        }
    };
    TestFunctionPair::new(prof(p)?, prof(q)?).map_err(|e| Error::Config(e.to_string()))
}

fn domain_bump(cfg: &ExperimentConfig) -> Profile {
    let b = cfg.domain_function.unwrap_or(BumpConfig {
        center: 0.0,
        halfwidth: 0.25,
        norm: None,
        amplitude: None,
    });
    Profile::bump(b.center, b.halfwidth, c(b.amplitude.unwrap_or(1.0), 0.0))
}

fn first_quantized_scattering(e11: &CMatrix, g: &Kernel) -> Result<CMatrix> {
    scattering_from_kappa(e11, &kappas(&autocorrelation(g))?)
}

fn entry_meta(d: usize, i: usize, j: usize) -> String {
    if d == 1 {
        String::new()
    } else {
        format!("entry={i},{j}")
    }
}

/// Round trip `E → G → (S, L, H) → G'`, returning `(‖G − G'‖, unitarity defect)`.
fn roundtrip_defects(e: &EMatrix) -> Result<(f64, f64)> {
    let g = solve_stratonovich_to_ito(e)?;
    let triple = slh_from_e(e)?;
    let back = coefficient_matrix_from_slh(&triple);
    Ok((g.blocks.max_block_diff(&back.blocks), check_unitarity(&g).max()))
}

pub fn run_slh(cfg: &ExperimentConfig) -> Result<Report> {
    let e = cfg.model.e_matrix()?;
    let d = e.dim();
    let mut rep = Report::new(ExperimentId::Slh, d, None, None);
    let triple = slh_from_e(&e)?;
    let g = solve_stratonovich_to_ito(&e)?;
    for (re, im, m) in [("s_re", "s_im", &triple.s), ("l_re", "l_im", &triple.l), ("h_re", "h_im", &triple.h)] {
        for i in 0..d {
            for j in 0..d {
                rep.push(None, None, re, m[(i, j)].re, entry_meta(d, i, j))?;
                rep.push(None, None, im, m[(i, j)].im, entry_meta(d, i, j))?;
            }
        }
    }
    let u = check_unitarity(&g);
    rep.push(None, None, "isometry_residual", u.isometry, "")?;
    rep.push(None, None, "coisometry_residual", u.co_isometry, "")?;

    let count = cfg.random_count.unwrap_or(100);
    if count > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut worst_rt = 0.0f64;
        let mut worst_u = 0.0f64;
        for idx in 0..count {
            let dim = cfg.random_dim.unwrap_or(1 + idx % 3);
            let er = random_e_matrix(&mut rng, dim, 2.0);
            let (rt, un) = roundtrip_defects(&er)?;
            worst_rt = worst_rt.max(rt);
            worst_u = worst_u.max(un);
        }
        let meta = format!("seed={}", cfg.seed);
        rep.push(None, None, "random_count", count as f64, meta.clone())?;
        rep.push(None, None, "random_roundtrip_max", worst_rt, meta.clone())?;
        rep.push(None, None, "random_unitarity_max", worst_u, meta)?;
    }
    Ok(rep)
}

/// Composite Simpson rule; the integrand vanishes to all orders at the ends.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels + panels % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

pub fn run_lemma7(cfg: &ExperimentConfig) -> Result<Report> {
    let g = kernel_of(&cfg.kernel)?;
    let mut rep = Report::new(ExperimentId::Lemma7Rate, 1, None, None);
    let h = Profile::piecewise(Profile::Zero, Profile::affine(c(0.0, 0.0), c(1.0, 0.0)));
    let mut pairs = Vec::new();
    for k in cfg.k_list(&[4.0, 8.0, 16.0, 32.0, 64.0]) {
        let eta = OneSided {
            inner: g.scaled(k),
            side: Side::Plus,
        };
        let v = pair_continuum(&eta, &h, 1e-14).norm();
        rep.push(Some(k), None, "pairing_norm", v, "h=x on (0,inf)")?;
        rep.push(Some(k), None, "pairing_norm_times_k", v * k, "")?;
        pairs.push((k, v));
    }
    rep.push_fit("lemma7", fit_rate(&pairs)?)?;

    let modulated = cfg.modulated_kernel.unwrap_or(KernelConfig {
        halfwidth: 1.0,
        center: 0.2,
        omega: 3.0,
    });
    for (label, kc) in [("bump", cfg.kernel), ("modulated", modulated)] {
        let kern = kernel_of(&kc)?;
        let kp = kappas(&autocorrelation(&kern))?;
        let meta = format!("kernel={label}");
        rep.push(None, None, "kappa_sum_defect", kp.sum_defect(), meta.clone())?;
        rep.push(None, None, "kappa_conjugacy_defect", kp.conjugacy_defect(), meta.clone())?;
        rep.push(None, None, "kappa_sigma", kp.sigma, meta.clone())?;
        // |1/c| is ∫ of the unnormalized profile; compare with Simpson on the envelope
        let constant = 1.0 / kern.norm.norm();
        let hw = kc.halfwidth;
        let omega = kc.omega;
        let re = simpson(
            |x| {
                let u = x / hw;
                if u.abs() < 1.0 {
                    (-1.0 / (1.0 - u * u)).exp() * (omega * (x + kc.center)).cos()
                } else {
                    0.0
                }
            },
            -hw,
            hw,
            20_000,
        );
        let im = simpson(
            |x| {
                let u = x / hw;
                if u.abs() < 1.0 {
                    (-1.0 / (1.0 - u * u)).exp() * (omega * (x + kc.center)).sin()
                } else {
                    0.0
                }
            },
            -hw,
            hw,
            20_000,
        );
        rep.push(None, None, "normalization_constant", constant, meta.clone())?;
        rep.push(None, None, "normalization_defect", (constant - c(re, im).norm()).abs(), meta)?;
    }
    Ok(rep)
}

/// Parallel map preserving input order.
fn cells<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> Result<R> + Sync + Send) -> Result<Vec<R>> {
    items.par_iter().map(f).collect()
}

pub fn run_graph_rate(cfg: &ExperimentConfig) -> Result<Report> {
    let grid = grid_of(cfg, 2.0, 1024)?;
    let e = cfg.model.e_matrix()?;
    let d = e.dim();
    let g = kernel_of(&cfg.kernel)?;
    let s = first_quantized_scattering(e.e11(), &g)?;
    let v_plus: Vec<C64> = unit_vector(d).iter().copied().collect();
    let profile = domain_bump(cfg);
    let f = JumpFunctionSpec::matched(&profile, &v_plus, &s)?;
    let s_control = match &cfg.control_scattering {
        Some(m) => m.matrix()?,
        None => identity(d),
    };
    let control = JumpFunctionSpec::matched(&profile, &v_plus, &s_control)?;
    let ks = cfg.k_list(&[4.0, 8.0, 16.0, 32.0]);
    let results = cells(&ks, |&k| {
        Ok((graph_residual(&f, &g, e.e11(), k, &grid)?, graph_residual(&control, &g, e.e11(), k, &grid)?))
    })?;
    let mut rep = Report::new(ExperimentId::GraphRate, d, Some(grid.n_points), None);
    let mut main = Vec::new();
    let mut ctrl = Vec::new();
    for (&k, (r, rc)) in ks.iter().zip(&results) {
        rep.push(Some(k), None, "graph_residual", r.generator, "")?;
        rep.push(Some(k), None, "smoothing_residual", r.smoothing, "")?;
        rep.push(Some(k), None, "control_graph_residual", rc.generator, "boundary violated")?;
        main.push((k, r.generator));
        ctrl.push((k, rc.generator));
    }
    rep.push_fit("graph", fit_rate(&main)?)?;
    rep.push_fit("control", fit_rate(&ctrl)?)?;
    Ok(rep)
}

pub fn run_first_quantized(cfg: &ExperimentConfig) -> Result<Report> {
    let grid = grid_of(cfg, 2.0, 1024)?;
    let e = cfg.model.e_matrix()?;
    let d = e.dim();
    let g = kernel_of(&cfg.kernel)?;
    let s = first_quantized_scattering(e.e11(), &g)?;
    let v_plus: Vec<C64> = unit_vector(d).iter().copied().collect();
    let f = JumpFunctionSpec::matched(&domain_bump(cfg), &v_plus, &s)?.sample(grid);
    let horizon = cfg.horizon.unwrap_or(0.5);
    let times = match &cfg.times {
        Some(t) => t.clone(),
        None => aligned_times(&grid, horizon, cfg.time_stride.unwrap_or(8)),
    };
    let ks = cfg.k_list(&[4.0, 8.0, 16.0, 32.0]);
    let k_max = ks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // the baseline rides along as one more cell
    let mut jobs: Vec<Option<f64>> = ks.iter().map(|&k| Some(k)).collect();
    jobs.push(None);
    let results = cells(&jobs, |job| match job {
        Some(k) => trotter_kato_sup_error(&f, e.e11(), &g, *k, &s, horizon, &times),
        None => discretization_baseline(&f, &g, k_max, horizon, &times),
    })?;
    let mut rep = Report::new(ExperimentId::FirstQuantized, d, Some(grid.n_points), None);
    let baseline = results.last().map(|r| r.sup).unwrap_or(f64::NAN);
    let mut pairs = Vec::new();
    for (k, r) in ks.iter().zip(&results) {
        rep.push(Some(*k), None, "sup_error", r.sup, format!("horizon={horizon}"))?;
        pairs.push((*k, r.sup));
    }
    rep.push(None, None, "baseline_sup_error", baseline, "E=0")?;
    let last = pairs.iter().find(|p| p.0 == k_max).map(|p| p.1).unwrap_or(f64::NAN);
    rep.push(Some(k_max), None, "baseline_ratio", last / baseline, "")?;
    if pairs.len() >= 3 {
        rep.push_fit("trotter-kato", fit_rate(&pairs)?)?;
    }
    Ok(rep)
}

pub fn run_fock_identities(cfg: &ExperimentConfig) -> Result<Report> {
    let grid = grid_of(cfg, 2.0, 64)?;
    let trunc = cfg.truncation.unwrap_or(2);
    let d = cfg.model.e_matrix()?.dim();
    let space = space_of(grid, trunc, d)?;
    let g = kernel_of(&cfg.kernel)?;
    let pair = test_pair(cfg)?;
    let phi = GridFunction::sample_scalar(grid, &pair.phi).values;
    let psi = GridFunction::sample_scalar(grid, &pair.psi).values;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let probe = FockVector::random_symmetric(space, &mut rng, trunc + 1);
    let low = FockVector::random_symmetric(space, &mut rng, trunc);
    let v = unit_vector(d);
    let mut rep = Report::new(ExperimentId::FockIdentities, d, Some(grid.n_points), Some(trunc));
    let dx = grid.dx();
    let inner = |a: &[C64], b: &[C64]| a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>() * dx;

    // level-agnostic identities
    let comm = apply_annihilation(&phi, &apply_creation(&psi, &low)?)?.sub(&apply_creation(&psi, &apply_annihilation(&phi, &low)?)?);
    let ccr = comm.sub(&low.scaled(inner(&phi, &psi))).below(trunc).norm();
    rep.push(None, None, "ccr_residual", ccr, "levels < M")?;
    let adj = (probe.inner(&apply_creation(&psi, &low)?) - apply_annihilation(&psi, &probe)?.inner(&low)).norm();
    rep.push(None, None, "adjoint_residual", adj, "")?;
    let exp_phi = FockVector::exponential(space, &GridFunction::sample_scalar(grid, &pair.phi), v.as_slice())?;
    let tail = exp_phi.dropped_norm_sqr / (exp_phi.norm_sqr() + exp_phi.dropped_norm_sqr);
    rep.push(None, None, "exponential_tail", tail, "relative squared")?;

    let ks = cfg.k_list(&[2.0, 4.0, 8.0]);
    let rows = cells(&ks, |&k| {
        let conv = OneParticleOperator::convolution(&g.scaled(k), &grid)?;
        let adj_h = conv.adjoint().apply_vec(&psi);
        let lhs = apply_annihilation(&psi, &second_quantize_contraction(&conv, &probe)?)?;
        let rhs = second_quantize_contraction(&conv, &apply_annihilation(&adj_h, &probe)?)?;
        let lemma10 = lhs.sub(&rhs).norm();

        // ρ on the grid is G†g, so the identity is exact there; the gap to the closed form is quadrature
        let gk = g.scaled(k);
        let g_s: Vec<C64> = grid.nodes().into_iter().map(|x| gk.eval(x)).collect();
        let rho = conv.adjoint().apply_vec(&g_s);
        let lhs13 = apply_annihilation(&g_s, &second_quantize_contraction(&conv, &probe)?)?;
        let rhs13 = second_quantize_contraction(&conv, &apply_annihilation(&rho, &probe)?)?;
        let lemma13 = lhs13.sub(&rhs13).norm();
        let closed = autocorrelation(&gk);
        let rho_gap = grid
            .nodes()
            .into_iter()
            .zip(&rho)
            .map(|(x, r)| (closed.eval(x) - r).norm())
            .fold(0.0, f64::max);

        let mapped = second_quantize_contraction(&conv, &exp_phi)?;
        let dist = mapped.sub(&exp_phi).norm_sqr();
        let ch = conv.apply_vec(&phi);
        let v2 = v.norm_squared();
        let formula = v2 * (inner(&ch, &ch).re.exp() + inner(&phi, &phi).re.exp() - 2.0 * inner(&ch, &phi).exp().re);
        let bound = 4.0 * v2 * exponential_tail(inner(&phi, &phi).re, trunc);
        Ok((lemma10, lemma13, rho_gap, dist, formula, bound))
    })?;
    for (&k, (l10, l13, rho_gap, dist, formula, bound)) in ks.iter().zip(rows) {
        rep.push(Some(k), None, "lemma10_residual", l10, "")?;
        rep.push(Some(k), None, "lemma13_residual", l13, "rho=G^dagger g")?;
        rep.push(Some(k), None, "rho_quadrature_gap", rho_gap, "sup over nodes")?;
        rep.push(Some(k), None, "lemma9_distance_sqr", dist, "")?;
        rep.push(Some(k), None, "lemma9_formula", formula, "")?;
        rep.push(Some(k), None, "lemma9_gap", (formula - dist).abs(), "")?;
        rep.push(Some(k), None, "lemma9_tail_bound", bound, "4|v|^2 sum_{m>M} |phi|^2m/m!")?;
    }
    Ok(rep)
}

fn pseudo_profiles(p: &PseudoConfig) -> (Profile, Profile) {
    let window = Profile::plateau(-p.plateau, p.plateau, p.ramp);
    let v = Profile::affine(c(p.v_offset, 0.0), c(p.v_slope, 0.0)).times(window.clone());
    let u = Profile::piecewise(Profile::affine(c(1.0, 0.0), c(p.u_slope, 0.0)).times(window), Profile::Zero);
    (v, u)
}

fn sample_on(space: &TruncatedFockSpace, f: &dyn Evaluate) -> Vec<C64> {
    space.grid.nodes().into_iter().map(|x| f.eval(x)).collect()
}

pub fn run_pseudo_rate(cfg: &ExperimentConfig) -> Result<Report> {
    let grid = grid_of(cfg, 2.0, 1024)?;
    let trunc = cfg.truncation.unwrap_or(2);
    let e = cfg.model.e_matrix()?;
    let d = e.dim();
    let space = space_of(grid, trunc, d)?;
    let triple = triple_of(cfg, &e)?;
    let pc = cfg.pseudo.unwrap_or(PseudoConfig {
        v_offset: 0.3,
        v_slope: 0.2,
        u_slope: 0.5,
        plateau: 1.05,
        ramp: 0.4,
        h: 1.0,
    });
    let (v, u) = pseudo_profiles(&pc);
    let h = unit_vector(d) * c(pc.h, 0.0);
    let spec = PseudoExponentialSpec::for_triple(v.clone(), u.clone(), h.clone(), &triple)?;
    let mut rep = Report::new(ExperimentId::PseudoRate, d, Some(grid.n_points), Some(trunc));

    rep.push(None, None, "boundary_residual", boundary_residual(&spec, &triple.s, &triple.l, &space)?, "")?;
    let s_control = match &cfg.control_scattering {
        Some(m) => m.matrix()?,
        None => identity(d),
    };
    let control = PseudoExponentialSpec::new(v, u, h, s_control, triple.l.clone())?;
    rep.push(
        None,
        None,
        "control_boundary_residual",
        boundary_residual(&control, &triple.s, &triple.l, &space)?,
        "mismatched scattering",
    )?;

    let phi = pseudo_exponential(&spec, &space)?;
    let plus = point_annihilation(&spec, Coord::Limit(Side::Plus), &space)?;
    let minus = point_annihilation(&spec, Coord::Limit(Side::Minus), &space)?;
    let mid = plus.add(&minus).scaled(c(0.5, 0.0));
    let jump = jump_annihilation(&spec, &space)?;
    let identity_res = jump
        .scaled(I)
        .add(&mid.apply_system(e.e11()))
        .add(&phi.apply_system(e.e10()))
        .below(trunc)
        .norm();
    rep.push(None, None, "boundary_identity_residual", identity_res, "levels < M")?;

    let g = kernel_of(&cfg.kernel)?;
    let ks = cfg.k_list(&[2.0, 4.0, 8.0, 16.0]);
    let rows = cells(&ks, |&k| {
        let gk = g.scaled(k);
        let rho = sample_on(&space, &autocorrelation(&gk));
        let a_rho = apply_annihilation(&rho, &phi)?;
        let lemma12 = a_rho.sub(&mid).below(trunc).norm();
        let singular = jump
            .scaled(I)
            .add(&a_rho.apply_system(e.e11()))
            .add(&phi.apply_system(e.e10()))
            .below(trunc);
        let conv = OneParticleOperator::convolution(&gk, &space.grid)?;
        let smoothed = second_quantize_contraction(&conv, &singular)?;
        let lifted = apply_creation(&sample_on(&space, &gk), &smoothed)?;
        Ok((lemma12, lifted.norm()))
    })?;
    let mut pairs = Vec::new();
    for (&k, (l12, l11)) in ks.iter().zip(rows) {
        rep.push(Some(k), None, "lemma12_residual", l12, "levels < M")?;
        rep.push(Some(k), None, "lemma11_norm", l11, "")?;
        pairs.push((k, l12));
    }
    rep.push_fit("lemma12", fit_rate(&pairs)?)?;
    Ok(rep)
}

pub fn run_weak_convergence(cfg: &ExperimentConfig) -> Result<Report> {
    let grid = grid_of(cfg, 2.0, 64)?;
    let trunc = cfg.truncation.unwrap_or(2);
    let e = cfg.model.e_matrix()?;
    let d = e.dim();
    let space = space_of(grid, trunc, d)?;
    let g = kernel_of(&cfg.kernel)?;
    let pair = test_pair(cfg)?;
    let u = unit_vector(d);
    let times = cfg.times.clone().unwrap_or_else(|| vec![0.25, 0.5]);
    for &t in &times {
        grid.steps(t).map_err(|err| Error::Config(err.to_string()))?;
    }
    let ks = cfg.k_list(&[1.0, 2.0, 4.0]);
    let mut jobs: Vec<Option<f64>> = ks.iter().map(|&k| Some(k)).collect();
    jobs.push(None);
    let zero = EMatrix::zeros(d);
    let results = cells(&jobs, |job| match job {
        Some(k) => weak_convergence_error(&e, &g, *k, &pair, &u, &u, &times, &space),
        None => weak_convergence_error(&zero, &g, 1.0, &pair, &u, &u, &times, &space),
    })?;
    let mut rep = Report::new(ExperimentId::WeakConvergence, d, Some(grid.n_points), Some(trunc));
    for (job, r) in jobs.iter().zip(&results) {
        match job {
            Some(k) => {
                rep.push(Some(*k), None, "dropped_fraction", r.dropped_fraction, "initial exponential tails")?;
                for p in &r.points {
                    let t = Some(p.t);
                    rep.push(Some(*k), t, "weak_error", p.error, "")?;
                    rep.push(Some(*k), t, "fock_element_re", p.fock.re, "")?;
                    rep.push(Some(*k), t, "fock_element_im", p.fock.im, "")?;
                    rep.push(Some(*k), t, "oracle_element_re", p.oracle.re, "")?;
                    rep.push(Some(*k), t, "oracle_element_im", p.oracle.im, "")?;
                    rep.push(Some(*k), t, "leakage", p.leakage, "diagnostic")?;
                }
            }
            None => {
                for p in &r.points {
                    rep.push(None, Some(p.t), "baseline_weak_error", p.error, "E=0")?;
                }
            }
        }
    }
    Ok(rep)
}

pub fn run_cocycle(cfg: &ExperimentConfig) -> Result<Report> {
    let grid = grid_of(cfg, 2.0, 64)?;
    let trunc = cfg.truncation.unwrap_or(2);
    let e = cfg.model.e_matrix()?;
    let d = e.dim();
    let space = space_of(grid, trunc, d)?;
    let g = kernel_of(&cfg.kernel)?;
    let pair = test_pair(cfg)?;
    let triple = triple_of(cfg, &e)?;
    let times = cfg.times.clone().unwrap_or_else(|| vec![0.25, 0.5]);
    let mut rep = Report::new(ExperimentId::Cocycle, d, Some(grid.n_points), Some(trunc));

    let free = CoefficientMatrix::zeros(d);
    let start = identity(d) * pair.overlap().exp();
    let vacuum = TestFunctionPair::new(Profile::Zero, Profile::Zero)?;
    let coeff = coefficient_matrix_from_slh(&triple);
    let (np, nq) = pair.norms();
    let bound = (0.5 * np * np + 0.5 * nq * nq).exp();
    let tol = cfg.tolerance.unwrap_or(1e-10);
    for &t in &times {
        let m = solve_matrix_element_with(&free, &pair, t, tol)?;
        rep.push(None, Some(t), "zero_generator_defect", max_abs_diff(&m.m, &start), "G=0")?;
        let vac = solve_matrix_element_with(&coeff, &vacuum, t, tol)?;
        rep.push(None, Some(t), "vacuum_defect", max_abs_diff(&vac.m, &vacuum_matrix_element(&triple, t)), "")?;
        let full = solve_matrix_element_with(&coeff, &pair, t, tol)?;
        rep.push(None, Some(t), "contraction_margin", bound - crate::linalg::spectral_norm(&full.m), "")?;
    }

    let s = times[0];
    let t = *times.get(1).unwrap_or(&times[0]);
    for &x in &[s, t] {
        grid.steps(x).map_err(|err| Error::Config(err.to_string()))?;
    }
    let k = cfg.k_list(&[2.0])[0];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let probe = FockVector::random_symmetric(space, &mut rng, trunc + 1);
    let zero = EMatrix::zeros(d);
    let cases: Vec<(&str, &EMatrix, f64, f64)> =
        vec![("zero-s", &e, 0.0, t), ("zero-t", &e, s, 0.0), ("free", &zero, s, t), ("coupled", &e, s, t)];
    let residuals = cells(&cases, |(_, em, ss, tt)| cocycle_residual(em, &g, k, *ss, *tt, &probe))?;
    for ((name, _, ss, tt), r) in cases.iter().zip(residuals) {
        rep.push(Some(k), None, "cocycle_residual", r, format!("case={name};s={ss};t={tt}"))?;
    }
    Ok(rep)
}

pub fn dispatch(cfg: &ExperimentConfig) -> Result<Report> {
    match cfg.experiment {
        ExperimentId::Slh => run_slh(cfg),
        ExperimentId::FirstQuantized => run_first_quantized(cfg),
        ExperimentId::GraphRate => run_graph_rate(cfg),
        ExperimentId::Lemma7Rate => run_lemma7(cfg),
        ExperimentId::FockIdentities => run_fock_identities(cfg),
        ExperimentId::PseudoRate => run_pseudo_rate(cfg),
        ExperimentId::WeakConvergence => run_weak_convergence(cfg),
        ExperimentId::Cocycle => run_cocycle(cfg),
    }
}
