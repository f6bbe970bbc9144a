//! Acceptance suite: one test per criterion, each printing a `criterion N:
//! PASS/FAIL` line per clause before asserting.
//!
//! Two clauses measure identities that the genus-0 construction provably
//! does not satisfy; those tests fail with the measured values on record
//! rather than with loosened tolerances (see the per-test comments). Run
//! with `--nocapture` to see the printed lines for passing criteria too.

use quadgreen::green::{
    delta_report, green_field, growth_report, oracle_deviation, verify_lh_zero,
};
use quadgreen::operators::{harmonicity_report, FieldDomain, VertexField};
use quadgreen::quadgraph::{
    build_multigrid_quadgraph, build_square_lattice_patch, Part, QuadGraph,
};
use quadgreen::quasimomentum::{
    contour_integral, im_quasimomentum, trace_level_contour, winding_number, winding_numbers,
    Contour, ContourError, MomentumVector,
};
use quadgreen::spectral::{
    build_weights, four_point_coefficients, parity_sign, wave_function, SpectralData,
    WeightFunction,
};
use quadgreen::theta::{theta, wave_function_theta, PeriodMatrix, ThetaFormulaData};
use quadgreen::{Complex64, SpherePoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Square-patch spectral data: alpha = (1, i) e^{i pi / 7}, unit modulus.
fn square_sd() -> SpectralData {
    let rot = Complex64::from_polar(1.0, std::f64::consts::PI / 7.0);
    SpectralData::new(vec![rot, rot * Complex64::i()])
        .unwrap()
        .with_reality_modulus(1.0)
        .unwrap()
}

/// Penrose-type spectral data: the fifth roots of unity.
fn penrose_sd() -> SpectralData {
    let alphas: Vec<Complex64> = (0..5)
        .map(|j| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / 5.0))
        .collect();
    SpectralData::new(alphas)
        .unwrap()
        .with_reality_modulus(1.0)
        .unwrap()
}

fn penrose_patch() -> QuadGraph {
    let sd = penrose_sd();
    build_multigrid_quadgraph(sd.alphas(), &[0.17, 0.23, 0.31, 0.13, 0.19], 5.0).unwrap()
}

/// Random z in an annulus around the marked points, avoiding their
/// immediate neighborhoods.
fn draw_z(rng: &mut ChaCha12Rng, sd: &SpectralData) -> Complex64 {
    let rho = sd.scale();
    loop {
        let r = rng.random_range(0.25 * rho..3.0 * rho);
        let t = rng.random_range(0.0..2.0 * std::f64::consts::PI);
        let z = Complex64::from_polar(r, t);
        let clear = sd
            .alphas()
            .iter()
            .all(|&a| (z - a).norm() > 0.05 * rho && (z + a).norm() > 0.05 * rho);
        if clear {
            return z;
        }
    }
}

fn wave_on(g: &QuadGraph, sd: &SpectralData, v: usize, z: Complex64) -> Complex64 {
    wave_function(sd, g.coords(v), SpherePoint::Finite(z)).unwrap()
}

struct Patch {
    name: &'static str,
    graph: QuadGraph,
    sd: SpectralData,
    nu: WeightFunction,
}

fn both_patches() -> Vec<Patch> {
    let square = build_square_lattice_patch(10, 10);
    let sd_square = square_sd();
    let nu_square = build_weights(&sd_square, &square).unwrap();
    let penrose = penrose_patch();
    let sd_penrose = penrose_sd();
    let nu_penrose = build_weights(&sd_penrose, &penrose).unwrap();
    vec![
        Patch {
            name: "square 10x10",
            graph: square,
            sd: sd_square,
            nu: nu_square,
        },
        Patch {
            name: "penrose r=5",
            graph: penrose,
            sd: sd_penrose,
            nu: nu_penrose,
        },
    ]
}

#[test]
fn criterion_1_wave_function_identities() {
    let mut rng = ChaCha12Rng::seed_from_u64(1001);
    let mut max_four_point = 0.0f64;
    let mut max_cr = 0.0f64;
    let mut max_tau = 0.0f64;

    for patch in both_patches() {
        let (g, sd, nu) = (&patch.graph, &patch.sd, &patch.nu);

        for f in 0..g.face_count() {
            let frame = g.face_frame(f).unwrap();
            let (a1, a2, a3) = four_point_coefficients(sd, &frame).unwrap();
            let [x0, y0, x1, y1] = g.face(f);
            let w = nu.between(x0, x1).unwrap();
            for _ in 0..50 {
                let z = draw_z(&mut rng, sd);
                let p1 = wave_on(g, sd, frame.p1, z);
                let p2 = wave_on(g, sd, frame.p2, z);
                let p3 = wave_on(g, sd, frame.p3, z);
                let p4 = wave_on(g, sd, frame.p4, z);
                let scale = p1.norm().max(p2.norm()).max(p3.norm()).max(p4.norm());
                let four_point = (p4 + a1 * p2 + a2 * p3 + a3 * p1).norm() / scale;
                max_four_point = max_four_point.max(four_point);

                let fx0 = wave_on(g, sd, x0, z);
                let fy0 = wave_on(g, sd, y0, z);
                let fx1 = wave_on(g, sd, x1, z);
                let fy1 = wave_on(g, sd, y1, z);
                let lhs = fy1 - fy0;
                let rhs = Complex64::i() * w * (fx1 - fx0);
                let cr = (lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(1e-300);
                max_cr = max_cr.max(cr);
            }
        }

        // psi(n, 0) = (-1)^(s(n)) exactly, at every vertex.
        for v in g.vertex_ids() {
            let value = wave_function(sd, g.coords(v), SpherePoint::zero()).unwrap();
            assert_eq!(
                value,
                Complex64::new(parity_sign(g.coords(v)), 0.0),
                "psi(n, 0) not bit-exact at vertex {v} of {}",
                patch.name
            );
        }

        // tau symmetry with the common modulus C = 1.
        let c = sd.reality_modulus().unwrap();
        for _ in 0..50 {
            let z = draw_z(&mut rng, sd);
            for v in g.vertex_ids().step_by(7) {
                let direct = wave_on(g, sd, v, z);
                let twisted =
                    wave_function(sd, g.coords(v), SpherePoint::Finite(z).tau(c)).unwrap();
                let expect = direct.conj() * parity_sign(g.coords(v));
                let dev = (twisted - expect).norm() / expect.norm().max(1e-300);
                max_tau = max_tau.max(dev);
            }
        }
    }

    let pass = max_four_point <= 1e-10 && max_cr <= 1e-10 && max_tau <= 1e-12;
    println!(
        "criterion 1: {} (four-point {max_four_point:.2e} <= 1e-10, CR {max_cr:.2e} <= 1e-10, \
         psi(n,0) exact, tau {max_tau:.2e} <= 1e-12)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass);
}

#[test]
fn criterion_2_weight_reality_and_duality() {
    let mut max_imag = 0.0f64;
    let mut max_duality = 0.0f64;
    for patch in both_patches() {
        for fw in patch.nu.face_weights() {
            max_imag = max_imag.max(fw.primal_value.im.abs());
            max_imag = max_imag.max(fw.dual_value.im.abs());
            max_duality =
                max_duality.max((fw.primal_value * fw.dual_value - 1.0).norm());
        }
    }
    let pass = max_imag <= 1e-12 && max_duality <= 1e-12;
    println!(
        "criterion 2: {} (max |Im nu| {max_imag:.2e} <= 1e-12, max |nu nu* - 1| {max_duality:.2e} <= 1e-12)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass);
}

#[test]
fn criterion_3_harmonicity() {
    let mut rng = ChaCha12Rng::seed_from_u64(1003);
    let mut worst = 0.0f64;
    for patch in both_patches() {
        let (g, sd, nu) = (&patch.graph, &patch.sd, &patch.nu);
        for _ in 0..20 {
            let z = draw_z(&mut rng, sd);
            for (domain, part) in [
                (FieldDomain::Primal, Part::Primal),
                (FieldDomain::Dual, Part::Dual),
            ] {
                let f = VertexField::sample(g, domain, |v| wave_on(g, sd, v, z));
                let report = harmonicity_report(g, nu, &f, part).unwrap();
                worst = worst.max(report.max_residual);
            }
        }
    }
    let pass = worst <= 1e-10;
    println!(
        "criterion 3: {} (max interior |L psi| {worst:.2e} <= 1e-10 relative)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass);
}

/// Trace with redraws when the level is rejected as saddle-adjacent; the
/// statements hold for almost all lambda, so rejection plus redraw is the
/// faithful sampling scheme.
fn trace_generic(
    sd: &SpectralData,
    k: &MomentumVector,
    rng: &mut ChaCha12Rng,
    resolution: usize,
) -> (Contour, Complex64) {
    for _ in 0..40 {
        let lambda = draw_z(rng, sd);
        match trace_level_contour(sd, k, lambda, resolution) {
            Ok(c) => return (c, lambda),
            Err(ContourError::SaddleLevel(_)) | Err(ContourError::LambdaNearPole(_)) => continue,
            Err(e) => panic!("contour tracing failed: {e}"),
        }
    }
    panic!("no generic lambda found in 40 draws");
}

fn random_momentum(rng: &mut ChaCha12Rng, d: usize) -> MomentumVector {
    loop {
        let k: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
        if k.iter().map(|c| c.abs()).sum::<f64>() > 0.3 {
            return MomentumVector::new(k).unwrap();
        }
    }
}

/// Momentum with every component bounded away from zero. A combination with
/// a near-zero component produces a sub-grid-cell level ring around the
/// corresponding marked point that no finite extraction resolution can see,
/// so winding comparisons use this distribution.
fn random_resolvable_momentum(rng: &mut ChaCha12Rng, d: usize) -> MomentumVector {
    let k: Vec<f64> = (0..d)
        .map(|_| rng.random_range(0.4..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 })
        .collect();
    MomentumVector::new(k).unwrap()
}

#[test]
fn criterion_4_contour_suite() {
    let mut rng = ChaCha12Rng::seed_from_u64(1004);
    let sd = square_sd();
    let resolution = 1024;

    let mut max_apollonius_cells = 0.0f64;
    let mut max_omega = 0.0f64;
    let mut winding_ok = true;

    for draw in 0..20 {
        // Six single-direction draws exercise the Apollonius oracle.
        let axis_draw = draw < 6;
        let k = if axis_draw {
            let j = draw % 2;
            let t = rng.random_range(0.3..2.5);
            let mut comps = vec![0.0; 2];
            comps[j] = t;
            MomentumVector::new(comps).unwrap()
        } else {
            random_momentum(&mut rng, 2)
        };
        let (contour, lambda) = trace_generic(&sd, &k, &mut rng, resolution);

        if axis_draw {
            let j = if k.components()[0] != 0.0 { 0 } else { 1 };
            let c_level = im_quasimomentum(&sd, j, SpherePoint::Finite(lambda));
            if c_level.abs() >= 0.1 {
                // |z - a| = E |z + a|: circle with center mu*a and radius
                // |a| sqrt(mu^2 - 1), mu = (1 + E^2) / (1 - E^2).
                let e2 = (2.0 * c_level).exp();
                let mu = (1.0 + e2) / (1.0 - e2);
                let center = sd.alpha(j) * mu;
                let radius = sd.alpha(j).norm() * (mu * mu - 1.0).sqrt();
                let cell = contour.cell_size();
                let rho2 = contour.chart_radius * contour.chart_radius;
                for comp in &contour.components {
                    for p in comp {
                        let local = if p.w_chart {
                            cell * (p.z().norm_sqr() / rho2)
                        } else {
                            cell
                        };
                        let dev = ((p.z() - center).norm() - radius).abs() / local;
                        max_apollonius_cells = max_apollonius_cells.max(dev);
                    }
                }
            }
        }

        let omega = contour_integral(&contour, |z| {
            if z.norm_sqr() == 0.0 {
                Err(ContourError::NonFiniteDensity(z))
            } else {
                Ok(-0.5 / z)
            }
        })
        .unwrap();
        max_omega = max_omega.max(omega.norm());

        let w_plus = winding_number(&contour, SpherePoint::Infinity).unwrap();
        let w_minus = winding_number(&contour, SpherePoint::zero()).unwrap();
        winding_ok &= w_plus == w_minus;
    }

    // Contour homology under shared sign patterns: windings at the marked
    // points indexed by J, literally equal per the criterion, and equal up
    // to a common shift per the homology statement.
    let mut literal_agree = 0usize;
    let mut shifted_agree = 0usize;
    let triples = 10usize;
    for _ in 0..triples {
        let k = random_resolvable_momentum(&mut rng, 2);
        let mut j_set: Vec<usize> = (0..2).filter(|_| rng.random_bool(0.7)).collect();
        if j_set.is_empty() {
            j_set.push(rng.random_range(0..2));
        }
        let kp = MomentumVector::new(
            (0..2)
                .map(|j| {
                    if j_set.contains(&j) {
                        k.components()[j] * rng.random_range(0.4..2.0)
                    } else {
                        rng.random_range(0.4..2.0)
                            * if rng.random_bool(0.5) { 1.0 } else { -1.0 }
                    }
                })
                .collect(),
        )
        .unwrap();
        // Redraw lambda until both traces accept it as generic.
        let (ca, cb) = loop {
            let lambda = draw_z(&mut rng, &sd);
            let first = trace_level_contour(&sd, &k, lambda, 512);
            let second = trace_level_contour(&sd, &kp, lambda, 512);
            if let (Ok(a), Ok(b)) = (first, second) {
                break (a, b);
            }
        };
        let points: Vec<SpherePoint> = j_set
            .iter()
            .flat_map(|&j| {
                [
                    SpherePoint::Finite(sd.alpha(j)),
                    SpherePoint::Finite(-sd.alpha(j)),
                ]
            })
            .collect();
        let wa = winding_numbers(&ca, &points).unwrap();
        let wb = winding_numbers(&cb, &points).unwrap();
        if wa == wb {
            literal_agree += 1;
        }
        let shift = wa[0] - wb[0];
        if wa.iter().zip(&wb).all(|(a, b)| a - b == shift) {
            shifted_agree += 1;
        }
    }

    let apollonius_pass = max_apollonius_cells <= 2.0;
    let omega_pass = max_omega <= 1e-6;
    let lemma4_literal_pass = literal_agree == triples;
    println!(
        "criterion 4: {} (Apollonius {max_apollonius_cells:.2} cells <= 2, |Omega integral| {max_omega:.2e} <= 1e-6, \
         winding(R+)=winding(R-): {winding_ok}, contour-homology literal winding equality {literal_agree}/{triples}, \
         up-to-constant-shift {shifted_agree}/{triples})",
        if apollonius_pass && omega_pass && winding_ok && lemma4_literal_pass {
            "PASS"
        } else {
            "FAIL"
        }
    );
    assert!(apollonius_pass, "Apollonius deviation {max_apollonius_cells}");
    assert!(omega_pass, "Omega integral {max_omega}");
    assert!(winding_ok, "winding mismatch between the involution fixed points");
    assert_eq!(
        shifted_agree, triples,
        "winding agreement up to a common shift must always hold"
    );
    // Literal winding equality additionally requires the two levels to
    // share a sign; for independent draws this fails on a set of positive
    // measure, so this clause is expected to fail for some seeds. The
    // measured counts above are the deliverable.
    assert_eq!(
        literal_agree, triples,
        "literal winding equality held for {literal_agree}/{triples} draws \
         (up-to-shift agreement {shifted_agree}/{triples}); equality requires \
         sign(Im p_k(lambda)) = sign(Im p_k'(lambda)), which random draws do not guarantee"
    );
}

#[test]
fn criterion_5_wave_function_growth() {
    let mut rng = ChaCha12Rng::seed_from_u64(1005);
    let sd = square_sd();
    let mut dev_plus = 0.0f64;
    let mut dev_minus = 0.0f64;
    for _ in 0..100 {
        let n: Vec<i64> = loop {
            let cand: Vec<i64> = (0..2).map(|_| rng.random_range(-6i64..7)).collect();
            if cand.iter().map(|c| c.abs()).sum::<i64>() <= 12 {
                break cand;
            }
        };
        let lambda = draw_z(&mut rng, &sd);
        let Ok(psi) = wave_function(&sd, &n, SpherePoint::Finite(lambda)) else {
            continue;
        };
        let exponent: f64 = n
            .iter()
            .enumerate()
            .map(|(j, &nj)| nj as f64 * im_quasimomentum(&sd, j, SpherePoint::Finite(lambda)))
            .sum();
        let plus = exponent.exp();
        let minus = (-exponent).exp();
        dev_plus = dev_plus.max((psi.norm() - plus).abs() / plus);
        dev_minus = dev_minus.max((psi.norm() - minus).abs() / minus);
    }
    let literal_pass = dev_plus <= 1e-12;
    println!(
        "criterion 5: {} (| |psi| - exp(+<n, Im p>)| relative {dev_plus:.2e} <= 1e-12; \
         sign-corrected | |psi| - exp(-<n, Im p>)| relative {dev_minus:.2e})",
        if literal_pass { "PASS" } else { "FAIL" }
    );
    // With Im p_j = ln|(z - a_j)/(z + a_j)| (pinned by its own examples),
    // psi = exp(i <n, p>) forces |psi| = exp(-<n, Im p>). The literal
    // criterion with the plus sign is therefore unattainable; the measured
    // deviations above document both readings.
    assert!(
        literal_pass,
        "literal growth identity failed as expected: plus-sign deviation {dev_plus:.3e}, \
         minus-sign deviation {dev_minus:.3e} (the minus-sign identity is the one that holds)"
    );
}

fn draw_green_lambda(
    rng: &mut ChaCha12Rng,
    sd: &SpectralData,
    g: &QuadGraph,
    nu: &WeightFunction,
    xt: usize,
    resolution: usize,
) -> (quadgreen::green::GreenField, Complex64) {
    for _ in 0..40 {
        let lambda = draw_z(rng, sd);
        match green_field(sd, g, nu, xt, lambda, 4, resolution) {
            Ok(f) => return (f, lambda),
            Err(quadgreen::green::GreenError::Contour(ContourError::SaddleLevel(_)))
            | Err(quadgreen::green::GreenError::Contour(ContourError::LambdaNearPole(_))) => {
                continue
            }
            Err(e) => panic!("green field failed: {e}"),
        }
    }
    panic!("no generic lambda for the green field in 40 draws");
}

#[test]
fn criterion_6_green_delta_property() {
    let mut rng = ChaCha12Rng::seed_from_u64(1006);
    let g = build_square_lattice_patch(12, 12);
    let sd = square_sd();
    let nu = build_weights(&sd, &g).unwrap();
    let xt = g.vertex_at(&[6, 6]).unwrap();
    let radius = 4i64;
    let resolution = 1024;

    let mut max_source_dev = 0.0f64;
    let mut max_offdiag = 0.0f64;
    let mut max_neighbor = 0.0f64;
    let mut max_far = 0.0f64;
    let mut max_oracle_dev = 0.0f64;
    let mut stability_dev = 0.0f64;
    let mut gamma0s: Vec<Complex64> = Vec::new();

    for trial in 0..5 {
        let (field, _lambda) = draw_green_lambda(&mut rng, &sd, &g, &nu, xt, resolution);
        gamma0s.push(field.gamma0);
        let delta = delta_report(&g, &nu, &field, radius).unwrap();
        max_source_dev =
            max_source_dev.max((delta.at_source - Complex64::new(1.0, 0.0)).norm());
        max_offdiag = max_offdiag.max(delta.max_neighbor.max(delta.max_far));
        max_neighbor = max_neighbor.max(delta.max_neighbor);
        max_far = max_far.max(delta.max_far);

        let oracle = oracle_deviation(&sd, &g, &field, resolution).unwrap();
        max_oracle_dev = max_oracle_dev.max(oracle);

        if trial == 0 {
            // Resolution-doubling stability of the Green values.
            let fine = green_field(&sd, &g, &nu, xt, field.lambda, radius, 2 * resolution)
                .unwrap();
            for (&v, gv) in &field.values {
                let other = fine.value(v).unwrap();
                stability_dev = stability_dev.max((gv.value - other).norm());
            }
        }
    }

    let diagonal_pass = max_source_dev <= 1e-12;
    let offdiag_pass = max_offdiag <= 1e-6;
    let oracle_pass = max_oracle_dev <= 1e-8;
    let stability_pass = stability_dev <= 1e-7;
    println!(
        "criterion 6: {} ((LG)(xt) dev {max_source_dev:.2e} (exact after calibration), \
         max offdiag |LG| {max_offdiag:.2e} <= 1e-6 [neighbors {max_neighbor:.2e}, far {max_far:.2e}], \
         oracle agreement {max_oracle_dev:.2e} <= 1e-8, resolution-doubling {stability_dev:.2e} <= 1e-7, \
         gamma0 = {:.6} vs stated diagonal 1)",
        if diagonal_pass && offdiag_pass && oracle_pass && stability_pass {
            "PASS"
        } else {
            "FAIL"
        },
        gamma0s[0]
    );
    assert!(diagonal_pass, "diagonal calibration defect {max_source_dev:.3e}");
    assert!(oracle_pass, "quadrature vs residue oracle {max_oracle_dev:.3e}");
    assert!(stability_pass, "resolution stability {stability_dev:.3e}");
    // At genus 0 the spectral density of a primal pair is a rational
    // function whose contour integral is fixed by winding numbers, and the
    // parity of primal displacements makes every off-diagonal H vanish; so
    // G = gamma0 * delta and (LG) at the source neighbors equals
    // nu * gamma0 = -nu / k(xt), here 0.25 in magnitude. The far residuals
    // (~1e-12) show the quadrature is exact; the neighbor defect is
    // structural, not numerical.
    assert!(
        offdiag_pass,
        "off-diagonal delta property failed as expected at the source neighbors: \
         max |LG| = {max_offdiag:.6} (neighbors {max_neighbor:.3e}, far {max_far:.3e}, \
         gamma0 = {:.6}, stated diagonal 1)",
        gamma0s[0]
    );
}

#[test]
fn criterion_7_green_growth_report() {
    let mut rng = ChaCha12Rng::seed_from_u64(1007);
    let g = build_square_lattice_patch(16, 16);
    let sd = square_sd();
    let nu = build_weights(&sd, &g).unwrap();
    let xt = g.vertex_at(&[8, 8]).unwrap();

    // Patch radius 6 so the ratio table covers |dn|_1 <= 6.
    let lambda = loop {
        let cand = draw_z(&mut rng, &sd);
        match green_field(&sd, &g, &nu, xt, cand, 6, 512) {
            Ok(_) => break cand,
            Err(_) => continue,
        }
    };
    let field = green_field(&sd, &g, &nu, xt, lambda, 6, 512).unwrap();
    let psi_samples: Vec<(Vec<i64>, Complex64)> = (0..100)
        .map(|_| {
            let n: Vec<i64> = (0..2).map(|_| rng.random_range(-6i64..7)).collect();
            (n, draw_z(&mut rng, &sd))
        })
        .collect();
    let report = growth_report(&field, &sd, &psi_samples);

    let all_finite = report.rows.iter().all(|r| r.ratio.is_finite());
    let covered = (1..=3).all(|m| report.rows.iter().any(|r| r.distance == 2 * m));
    // No monotone blow-up: the per-distance maxima must not grow by more
    // than an order of magnitude per step, once above the noise floor.
    let mut class_max = std::collections::BTreeMap::new();
    for r in &report.rows {
        let entry = class_max.entry(r.distance).or_insert(0.0f64);
        *entry = entry.max(r.ratio);
    }
    let maxima: Vec<f64> = class_max.values().copied().collect();
    let blow_up = maxima
        .windows(2)
        .all(|w| w[1] > 10.0 * w[0].max(1e-9));
    let pass = all_finite && covered && !blow_up;
    println!(
        "criterion 7: {} (|G|/exp(Im p_dn(lambda)) bounded by recorded constant {:.3e} over |dn|_1 <= 6, \
         per-distance maxima {:?}, psi modulus deviation vs exp(+): {:.2e}, vs exp(-): {:.2e})",
        if pass { "PASS" } else { "FAIL" },
        report.max_ratio,
        maxima.iter().map(|m| format!("{m:.2e}")).collect::<Vec<_>>(),
        report.psi_dev_plus,
        report.psi_dev_minus,
    );
    assert!(pass);
}

#[test]
fn criterion_8_lh_report() {
    let mut rng = ChaCha12Rng::seed_from_u64(1008);
    let g = build_square_lattice_patch(12, 12);
    let sd = square_sd();
    let nu = build_weights(&sd, &g).unwrap();
    let xt = g.vertex_at(&[6, 6]).unwrap();

    let report = loop {
        let lambda = draw_z(&mut rng, &sd);
        match verify_lh_zero(&sd, &g, &nu, xt, lambda, 4, 512) {
            Ok(r) => break r,
            Err(_) => continue,
        }
    };
    let far_pass = report.max_far <= 1e-6;
    println!(
        "criterion 8: {} (max |LH| at |dn|_1 >= 2 (non-neighbors): {:.2e} <= 1e-6; \
         unconditional rows: x = xt: {:.2e}, neighbors of xt: {:.2e}; \
         contour replacement over {} faces: {:.2e} overall, {:.2e} on the {} sign-uniform faces)",
        if far_pass { "PASS" } else { "FAIL" },
        report.max_far,
        report.at_source,
        report.max_at_neighbors,
        report.faces_checked,
        report.contour_replacement_max,
        report.contour_replacement_uniform_max,
        report.sign_uniform_faces,
    );
    assert!(far_pass, "far LH residual {:.3e}", report.max_far);
}

#[test]
fn criterion_9_theta_suite() {
    let mut rng = ChaCha12Rng::seed_from_u64(1009);

    // Quasi-periodicity for 50 random (z, B), genus up to 3.
    let mut max_dev = 0.0f64;
    for trial in 0..50 {
        let g = 1 + trial % 3;
        let a: Vec<Vec<f64>> = (0..g)
            .map(|_| (0..g).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let rows: Vec<Vec<Complex64>> = (0..g)
            .map(|i| {
                (0..g)
                    .map(|j| {
                        let re = 0.3 * ((i * j + i + j) as f64).sin();
                        let mut im = if i == j { 0.5 } else { 0.0 };
                        for l in 0..g {
                            im += a[i][l] * a[j][l];
                        }
                        Complex64::new(re, im)
                    })
                    .collect()
            })
            .collect();
        let b = PeriodMatrix::new(rows).unwrap();
        let z: Vec<Complex64> = (0..g)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-0.4..0.4)))
            .collect();
        let base = theta(&z, &b, 1e-12).unwrap();
        for k in 0..g {
            let mut zi = z.clone();
            zi[k] += 1.0;
            let vi = theta(&zi, &b, 1e-12).unwrap();
            max_dev = max_dev.max((vi - base).norm() / base.norm().max(1e-300));

            let mut zb = z.clone();
            for i in 0..g {
                zb[i] += b.entry(i, k);
            }
            let vb = theta(&zb, &b, 1e-12).unwrap();
            let factor =
                (-Complex64::i() * std::f64::consts::PI * (b.entry(k, k) + 2.0 * z[k])).exp();
            max_dev = max_dev.max((vb - factor * base).norm() / (factor * base).norm().max(1e-300));
        }
    }

    // Odd half-period zero at genus 1, B = (i).
    let b1 = PeriodMatrix::new(vec![vec![Complex64::new(0.0, 1.0)]]).unwrap();
    let odd = theta(&[Complex64::new(0.5, 0.5)], &b1, 1e-12)
        .unwrap()
        .norm();

    // Genus-0 degeneration of the explicit formula vs the product form.
    let sd = square_sd();
    let mut max_degeneration = 0.0f64;
    for _ in 0..50 {
        let n: Vec<i64> = (0..2).map(|_| rng.random_range(-4i64..5)).collect();
        let z = draw_z(&mut rng, &sd);
        let ints: Vec<Complex64> = sd.alphas().iter().map(|&a| ((z + a) / (z - a)).ln()).collect();
        let data = ThetaFormulaData::genus_zero(ints);
        let via_theta = wave_function_theta(&data, &n, 1e-12).unwrap();
        let product = wave_function(&sd, &n, SpherePoint::Finite(z)).unwrap();
        max_degeneration =
            max_degeneration.max((via_theta - product).norm() / product.norm().max(1e-300));
    }

    let pass = max_dev <= 1e-9 && odd <= 1e-12 && max_degeneration <= 1e-10;
    println!(
        "criterion 9: {} (quasi-periodicity {max_dev:.2e} <= 1e-9, odd half-period |theta| {odd:.2e}, \
         genus-0 degeneration {max_degeneration:.2e} <= 1e-10)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass);
}
