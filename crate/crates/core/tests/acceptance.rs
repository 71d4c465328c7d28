//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails.

use std::time::Instant;

use msgrad::analysis::{self, cos_between, error_map_with, error_stats, Bounds, Execution};
use msgrad::estimate::multi_vector_sum;
use msgrad::vector::norm;
use msgrad::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn field(s: &str) -> CorpusField {
    s.parse().unwrap()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn angle_deg(a: &[f64], b: &[f64]) -> f64 {
    cos_between(a, b).unwrap().acos().to_degrees()
}

/// Complex step on random quadratics is exact to 1e-15 relative for every h.
fn c1_complex_step_exactness() -> Outcome {
    let hs = [1e-2, 1e-10, 1e-50, 1e-100, 1e-150];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut worst_cond = 0.0;
    let mut over = 0;
    for _ in 0..100 {
        let (a, b, c, x) = (
            rng.random_range(-10.0..10.0),
            rng.random_range(-10.0..10.0),
            rng.random_range(-10.0..10.0),
            rng.random_range(-10.0..10.0),
        );
        let f = CorpusField::Quadratic1d { a, b, c };
        // fma rounds 2ax + b once, so the oracle is correctly rounded.
        let truth = (2.0 * a).mul_add(x, b);
        let cond = ((2.0 * a * x).abs() + b.abs()) / truth.abs();
        let mut draw_worst: f64 = 0.0;
        for h in hs {
            let d = complex_step(&f, &Point::from(x), &UnitVector::axis(1, 0), h).unwrap().value;
            draw_worst = draw_worst.max((d - truth).abs() / truth.abs());
        }
        over += usize::from(draw_worst > 1e-15);
        if draw_worst > worst {
            worst = draw_worst;
            worst_cond = cond;
        }
    }
    outcome(
        worst <= 1e-15,
        format!(
            "max relative error {worst:.3e} (tol 1e-15) over 100 draws x 5 h; draws over tolerance {over}; \
             condition number (|2ax|+|b|)/|2ax+b| of the worst draw {worst_cond:.1}"
        ),
    )
}

/// Central differences hit a roundoff floor that complex step does not.
fn c2_roundoff_floor() -> Outcome {
    let f = field("expsin2d");
    let sweep = analysis::log_range(1e-1, 1e-16, 16);
    let small: Vec<f64> = sweep.iter().copied().filter(|&h| h <= 1e-10).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut min_ratio = f64::INFINITY;
    let mut v_shapes = 0;
    let mut monotone = 0;
    for _ in 0..20 {
        let p = Point::from([rng.random_range(-1.0..1.0), rng.random_range(-1.5..1.5)]);
        let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let n = UnitVector::new(vec![t.cos(), t.sin()]).unwrap();
        let rows = analysis::h_sweep(&f, &p, &n, &sweep, &[DerivKind::Central, DerivKind::Complex]).unwrap();
        let (central, complex) = rows.split_at(sweep.len());
        let grad = f.analytic_gradient(p.coords()).unwrap();
        // Roundoff scale of grad . n: the magnitude of its terms, not of the sum.
        let term_scale: f64 = grad.iter().zip(n.coords()).map(|(g, c)| (g * c).abs()).sum();

        for &h in &small {
            let ce = central.iter().find(|r| r.h == h).unwrap().abs_error;
            let xe = complex.iter().find(|r| r.h == h).unwrap().abs_error;
            let ratio = if xe == 0.0 { f64::INFINITY } else { ce / xe };
            min_ratio = min_ratio.min(ratio);
        }

        // V shape: interior minimum, both ends at least 10x above it, and
        // the curve rises again after the minimum.
        let ce: Vec<f64> = central.iter().map(|r| r.abs_error).collect();
        let (imin, emin) = ce
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let rises = ce.windows(2).skip(imin).any(|w| w[1] > w[0]);
        if imin > 0 && imin < ce.len() - 1 && ce[0] > 10.0 * emin && ce[ce.len() - 1] > 10.0 * emin && rises {
            v_shapes += 1;
        }

        // Monotone non-increasing down to a floor of 1e-15 relative to the
        // term scale.
        let floor = 1e-15 * term_scale;
        let xe: Vec<f64> = complex.iter().map(|r| r.abs_error).collect();
        if xe.windows(2).all(|w| w[1] <= w[0].max(floor)) {
            monotone += 1;
        }
    }
    outcome(
        min_ratio >= 1e3 && v_shapes == 20 && monotone == 20,
        format!(
            "min central/complex error ratio {min_ratio:.3e} (need >= 1e3); V-shaped central curves {v_shapes}/20; monotone complex curves {monotone}/20"
        ),
    )
}

/// Half-square raw sum is (4x, 4y); the two-frame multi-axis mean is (2x, 2y).
fn c3_multi_axis_closed_form() -> Outcome {
    let f = field("circle0:r=1");
    let half = polygon_set(4, Span::Half).unwrap();
    let frames = find_orthonormal_frames(&half, directions::FRAME_TOL);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut raw_err, mut avg_err): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let (x, y) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let p = Point::from([x, y]);
        let raw = multi_vector_sum(&f, &p, &half, DerivKind::Complex, 1e-100).unwrap();
        raw_err = raw_err.max(max_abs_diff(&raw, &[4.0 * x, 4.0 * y]));
        let g = multi_axis(&f, &p, &frames, DerivKind::Complex, 1e-100).unwrap();
        avg_err = avg_err.max(max_abs_diff(&g.vector, &[2.0 * x, 2.0 * y]));
    }
    outcome(
        frames.len() == 2 && raw_err <= 1e-12 && avg_err <= 1e-12,
        format!("frames {} ; raw sum max err {raw_err:.3e}; multi-axis max err {avg_err:.3e} (tol 1e-12)", frames.len()),
    )
}

/// sum cos^2 = K/2 and sum sin cos = 0 for even K, read off the multi-vector
/// raw sum of circle0 at (1, 0) where d_k = 2 cos.
fn c4_trig_identities() -> Outcome {
    let f = field("circle0:r=1");
    let mut worst_id: f64 = 0.0;
    let mut worst_est: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for k in [4usize, 6, 8, 12, 16, 64] {
        let s = polygon_set(k, Span::Half).unwrap();
        let raw = multi_vector_sum(&f, &Point::from([1.0, 0.0]), &s, DerivKind::Complex, 1e-100).unwrap();
        let (sum_cos2, sum_sincos) = (raw[0] / 2.0, raw[1] / 2.0);
        worst_id = worst_id.max((sum_cos2 - k as f64 / 2.0).abs()).max(sum_sincos.abs());
        for _ in 0..20 {
            let (x, y) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let g = multi_vector(&f, &Point::from([x, y]), &s, DerivKind::Complex, 1e-100).unwrap();
            worst_est = worst_est.max(max_abs_diff(&g.vector, &[2.0 * x, 2.0 * y]));
        }
    }
    outcome(
        worst_id <= 1e-10 && worst_est <= 1e-10,
        format!("identity max err {worst_id:.3e}; estimate max err {worst_est:.3e} (tol 1e-10)"),
    )
}

/// Any orthonormal frame yields the exact gradient of circle0.
fn c5_frame_choice_invariance() -> Outcome {
    let f = field("circle0:r=1");
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for seed in 0..1000 {
        let frame = OrthonormalFrame::canonical(2).rotated(&random_rotation(2, seed).unwrap()).unwrap();
        let (x, y) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let g = single_axis(&f, &Point::from([x, y]), &frame, DerivKind::Complex, 1e-100).unwrap();
        worst = worst.max(max_abs_diff(&g.vector, &[2.0 * x, 2.0 * y]));
    }
    outcome(worst <= 1e-10, format!("max abs error {worst:.3e} over 1000 Haar frames (tol 1e-10)"))
}

/// circle0..circle3 share their estimated unit gradient on the boundary.
fn c6_unit_gradient_equivalence() -> Outcome {
    let fields = [
        field("circle0:r=1"),
        field("circle1:r=1"),
        field("circle2:r=1"),
        field("circle3:r=1,a=3"),
    ];
    let frame = OrthonormalFrame::canonical(2);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 1.0f64;
    for _ in 0..50 {
        let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let p = Point::from([t.cos(), t.sin()]);
        let units: Vec<Vec<f64>> = fields
            .iter()
            .map(|f| single_axis(f, &p, &frame, DerivKind::Complex, 1e-50).unwrap().unit().unwrap())
            .collect();
        for a in &units {
            for b in &units {
                worst = worst.min(cos_between(a, b).unwrap());
            }
        }
    }
    outcome(worst >= 1.0 - 1e-9, format!("min pairwise cos {worst:.17} (need >= 1 - 1e-9)"))
}

/// Independent oracle for the hart sum: weights +1/-1 by explicit geometry.
fn hart_oracle(p: [f64; 2], dirs: &[UnitVector], radius: f64, outside: impl Fn(f64, f64) -> bool) -> [f64; 2] {
    let mut acc = [0.0, 0.0];
    for v in dirs {
        let (x, y) = (p[0] + radius * v.coords()[0], p[1] + radius * v.coords()[1]);
        let w = if outside(x, y) { 1.0 } else { -1.0 };
        acc[0] += w * v.coords()[0];
        acc[1] += w * v.coords()[1];
    }
    acc
}

/// Hart multisample on the half-plane and disk boundaries.
fn c7_hart_multisample() -> Outcome {
    let k = 64;
    let base = polygon_set(k, Span::Full).unwrap();

    let hp = field("halfplane2d");
    let mut hp_worst: f64 = 0.0;
    let mut hp_within = 0;
    let mut mean = [0.0, 0.0];
    let mut oracle_ok = true;
    for seed in 0..100 {
        let s = rotate_set(&base, &random_rotation(2, seed).unwrap()).unwrap();
        let g = hart_multisample(&hp, &Point::from([0.0, 0.0]), &s, 1.0).unwrap();
        let want = hart_oracle([0.0, 0.0], s.vectors(), 1.0, |_, y| y > 0.0);
        oracle_ok &= max_abs_diff(&g.vector, &want) <= 1e-12;
        let a = angle_deg(&g.vector, &[0.0, 1.0]);
        hp_worst = hp_worst.max(a);
        hp_within += usize::from(a <= 1.0);
        let u = g.unit().unwrap();
        mean[0] += u[0];
        mean[1] += u[1];
    }
    let mean_angle = angle_deg(&mean, &[0.0, 1.0]);

    let disk = field("disk2d:r=1");
    let mut disk_worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..200u64 {
        let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let p = [t.cos(), t.sin()];
        let s = rotate_set(&base, &random_rotation(2, 1000 + i).unwrap()).unwrap();
        let g = hart_multisample(&disk, &Point::from(p), &s, 0.05).unwrap();
        let want = hart_oracle(p, s.vectors(), 0.05, |x, y| x * x + y * y > 1.0);
        oracle_ok &= max_abs_diff(&g.vector, &want) <= 1e-12;
        disk_worst = disk_worst.max(angle_deg(&g.vector, &p));
    }

    let half_spacing = 180.0 / k as f64;
    outcome(
        oracle_ok && hp_within == 100 && disk_worst <= 10.0,
        format!(
            "half-plane: {hp_within}/100 seeds within 1 deg, worst {hp_worst:.4} deg (a rotated {k}-gon can be off by up to 180/K = {half_spacing:.4} deg; mean direction over seeds {mean_angle:.4} deg); \
             disk2d r=0.05: worst {disk_worst:.4} deg (tol 10); oracle agreement {oracle_ok}"
        ),
    )
}

/// Exact orthogonality in Q(phi): `a + b phi` stored as (a, b), phi^2 = phi + 1.
fn icosahedron_exact_frame_count() -> usize {
    type Qphi = (i64, i64);
    let mul = |x: Qphi, y: Qphi| -> Qphi { (x.0 * y.0 + x.1 * y.1, x.0 * y.1 + x.1 * y.0 + x.1 * y.1) };
    let add = |x: Qphi, y: Qphi| -> Qphi { (x.0 + y.0, x.1 + y.1) };
    let neg = |x: Qphi| -> Qphi { (-x.0, -x.1) };
    let (zero, one, phi) = ((0, 0), (1, 0), (0, 1));
    let mut verts: Vec<[Qphi; 3]> = Vec::new();
    for s1 in [one, neg(one)] {
        for s2 in [phi, neg(phi)] {
            verts.push([zero, s1, s2]);
            verts.push([s2, zero, s1]);
            verts.push([s1, s2, zero]);
        }
    }
    let is_neg = |v: &[Qphi; 3]| {
        // sign of the first nonzero coordinate; every entry here is 0, ±1 or ±phi
        let c = v.iter().find(|c| **c != zero).unwrap();
        c.0 + c.1 < 0
    };
    let lines: Vec<[Qphi; 3]> = verts.into_iter().filter(|v| !is_neg(v)).collect();
    let dot3 = |a: &[Qphi; 3], b: &[Qphi; 3]| add(add(mul(a[0], b[0]), mul(a[1], b[1])), mul(a[2], b[2]));
    let mut count = 0;
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            for k in j + 1..lines.len() {
                if dot3(&lines[i], &lines[j]) == zero && dot3(&lines[i], &lines[k]) == zero && dot3(&lines[j], &lines[k]) == zero {
                    count += 1;
                }
            }
        }
    }
    count
}

fn truncated_octahedron_exact_frame_count() -> usize {
    let mut lines: Vec<[i64; 3]> = Vec::new();
    for x in -2i64..=2 {
        for y in -2i64..=2 {
            for z in -2i64..=2 {
                let mut a = [x.abs(), y.abs(), z.abs()];
                a.sort();
                if a == [0, 1, 2] && !lines.contains(&[-x, -y, -z]) {
                    lines.push([x, y, z]);
                }
            }
        }
    }
    let d = |a: &[i64; 3], b: &[i64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let mut count = 0;
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            for k in j + 1..lines.len() {
                if d(&lines[i], &lines[j]) == 0 && d(&lines[i], &lines[k]) == 0 && d(&lines[j], &lines[k]) == 0 {
                    count += 1;
                }
            }
        }
    }
    count
}

/// Every polyhedron validates; frame counts match exhaustive search.
fn c8_direction_sets() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for p in Polyhedron::ALL {
        let s = polyhedron_set(p).unwrap();
        let r = validate_set(&s);
        let closed_ok = !r.antipodal_closed || r.centroid_norm <= 1e-9;
        ok &= r.max_norm_residual <= 1e-12 && closed_ok && r.count == p.vertex_count();
        notes.push(format!("{p}:{}v/{}f", r.count, r.frame_count));
    }
    let frames = |s: &DirectionSet| find_orthonormal_frames(s, directions::FRAME_TOL).len();
    let octa = frames(&polyhedron_set(Polyhedron::Octahedron).unwrap());
    let oct8 = frames(&polygon_set(8, Span::Full).unwrap());
    let cube = frames(&polyhedron_set(Polyhedron::Cube).unwrap());
    let ico = frames(&polyhedron_set(Polyhedron::Icosahedron).unwrap());
    let tro = frames(&polyhedron_set(Polyhedron::TruncatedOctahedron).unwrap());
    let (ico_exact, tro_exact) = (icosahedron_exact_frame_count(), truncated_octahedron_exact_frame_count());
    ok &= octa == 1 && oct8 == 2 && cube == 0 && ico == ico_exact && tro == tro_exact;
    outcome(
        ok,
        format!(
            "{}; octahedron={octa} polygon8={oct8} cube={cube}; icosahedron={ico} (exact search {ico_exact}), truncated_octahedron={tro} (exact search {tro_exact})",
            notes.join(" ")
        ),
    )
}

/// Seeded error maps are byte-identical across runs and across serial and
/// parallel execution.
fn c9_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_msgrad");
    let run = |name: &str, serial: bool| {
        let path = dir.path().join(name);
        let mut cmd = std::process::Command::new(bin);
        cmd.args([
            "errmap", "--field", "circle2:r=1", "--method", "multi-vector", "--deriv", "central", "--h", "1e-4", "--set",
            "polygon:12", "--seed", "42", "--width", "48", "--height", "32", "--out",
        ])
        .arg(&path);
        if serial {
            cmd.arg("--serial");
        }
        let out = cmd.output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        (std::fs::read(&path).unwrap(), out.stdout)
    };
    let (a, sa) = run("a.pgm", false);
    let (b, sb) = run("b.pgm", false);
    let (c, sc) = run("c.pgm", true);
    let cli_same = a == b && a == c && sa == sb && sa == sc;

    let f = field("expsin2d");
    let cfg = EstimatorConfig::new(
        Method::MultiAxis,
        DerivKind::Central,
        DirectionSource::Set(polygon_set(8, Span::Full).unwrap()),
    )
    .with_h(1e-3)
    .with_seed(9);
    let b = Bounds::new(-1.0, 1.0, 0.2, 2.0).unwrap();
    let par = error_map_with(&f, &cfg, b, 40, 30, 1e-6, Execution::Parallel).unwrap();
    let ser = error_map_with(&f, &cfg, b, 40, 30, 1e-6, Execution::Serial).unwrap();
    let bitwise = par
        .samples
        .iter()
        .zip(&ser.samples)
        .all(|(x, y)| x.cos_theta.to_bits() == y.cos_theta.to_bits() && x.est_norm.to_bits() == y.est_norm.to_bits());
    outcome(
        cli_same && bitwise,
        format!("CLI PGM+stdout identical across 2 parallel + 1 serial runs: {cli_same}; library serial == parallel bitwise: {bitwise}"),
    )
}

/// 64x64 circle0 map with single-axis complex step.
fn c10_error_map_sanity() -> Outcome {
    let f = field("circle0:r=1");
    let cfg = EstimatorConfig::new(
        Method::SingleAxis,
        DerivKind::Complex,
        DirectionSource::Frames(vec![OrthonormalFrame::canonical(2)]),
    );
    let start = Instant::now();
    let grid = analysis::error_map(&f, &cfg, Bounds::new(-2.0, 2.0, -2.0, 2.0).unwrap(), 64, 64, 1e-6).unwrap();
    let stats = error_stats(&grid).unwrap();
    let secs = start.elapsed().as_secs_f64();
    // Pixels outside the exclusion disk (true gradient norm >= 1e-6).
    let bad = grid
        .samples
        .iter()
        .filter(|s| s.degenerate && norm(&f.analytic_gradient(s.point.coords()).unwrap()) >= 1e-6)
        .count();
    let min_eps = stats.eps_min;
    outcome(
        stats.angle_p50 <= 1e-5 && bad == 0 && secs < 5.0 && min_eps >= 1.0 - 1e-12,
        format!(
            "median angle {:.3e} deg (tol 1e-5); degenerate outside exclusion {bad}; min epsilon {min_eps}; {secs:.3} s (limit 5 s)",
            stats.angle_p50
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("C1 complex-step exactness on quadratics", c1_complex_step_exactness),
        ("C2 roundoff-floor separation", c2_roundoff_floor),
        ("C3 multi-axis closed form", c3_multi_axis_closed_form),
        ("C4 trig-identity lemmas", c4_trig_identities),
        ("C5 frame-choice invariance", c5_frame_choice_invariance),
        ("C6 unit-gradient equivalence", c6_unit_gradient_equivalence),
        ("C7 hart multisample", c7_hart_multisample),
        ("C8 direction-set validity", c8_direction_sets),
        ("C9 determinism", c9_determinism),
        ("C10 error-map sanity", c10_error_map_sanity),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        println!("[{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
