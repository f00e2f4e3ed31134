//! Acceptance suite: one PASS/FAIL line per criterion. Criterion 12 is
//! experimental and reported without affecting the exit status.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use verblunsky_core::alpha::{alpha_x_moment, count_tuples, verify_cn_identity};
use verblunsky_core::combinatorics::{haar_weight, partitions, MultiIndex, MultiplicityVector};
use verblunsky_core::exact::Rat;
use verblunsky_core::gaussian::{
    a_coefficients, gaussian_x_moment, gaussian_x_moment_raw, multiplicity_free_moment,
    variance_pmf, MomentPolynomial,
};
use verblunsky_core::graph::c_via_graphs;
use verblunsky_core::montecarlo::{
    mc_x_moment, pushforward_doubling_study, McParams, PushforwardParams, Seed, Side,
};
use verblunsky_core::opuc::{
    jacobian_determinant, jacobian_determinant_exact, measure_density, szego_identity_gap,
    trig_moments, verblunsky_from_moments, ComplexRat, JacobianMode, VerblunskySeq,
};

type Outcome = Result<String, String>;

fn mi(s: &str) -> MultiIndex {
    s.parse().unwrap()
}

fn mv(s: &str) -> MultiplicityVector {
    s.parse().unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))
}

fn all_pairs(max_deg: u32) -> Vec<(MultiIndex, MultiIndex)> {
    (1..=max_deg)
        .flat_map(|d| {
            let ps = partitions(d);
            ps.iter()
                .flat_map(|p| ps.iter().map(move |q| (p.clone(), q.clone())))
                .collect::<Vec<_>>()
        })
        .collect()
}

// ---------- independent Gaussian-integral oracle ----------

/// Polynomial in f_1, f_2, ... keyed by exponent vectors.
type FPoly = BTreeMap<Vec<u32>, Rat>;

fn integer_partitions(n: u32, largest: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in (1..=largest.min(n)).rev() {
        for mut rest in integer_partitions(n - first, first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn fact(n: u32) -> Rat {
    (1..=n as i64).map(Rat::int).product()
}

/// Coefficient n of exp(−Σ f_k z^k): Σ over partitions of ∏ (−f_u)^{J(u)}/J(u)!.
fn x_coefficient(n: u32, vars: usize) -> FPoly {
    let mut out = FPoly::new();
    for parts in integer_partitions(n, n) {
        let mut exps = vec![0u32; vars + 1];
        parts.iter().for_each(|&u| exps[u as usize] += 1);
        let mut c = if parts.len() % 2 == 1 {
            Rat::int(-1)
        } else {
            Rat::one()
        };
        for &e in &exps {
            c = c * fact(e).recip().unwrap();
        }
        *out.entry(exps).or_insert_with(Rat::zero) += c;
    }
    out
}

fn fpoly_mul(a: &FPoly, b: &FPoly) -> FPoly {
    let mut out = FPoly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            *out.entry(e).or_insert_with(Rat::zero) += ca * cb;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn x_monomial(p: &MultiIndex, vars: usize) -> FPoly {
    let mut acc: FPoly = [(vec![0; vars + 1], Rat::one())].into_iter().collect();
    for n in p.parts() {
        acc = fpoly_mul(&acc, &x_coefficient(n, vars));
    }
    acc
}

/// E(x^p (x^q)^*) with f_k independent complex Gaussians, E|f_k|² = 1/(kβ):
/// E(f^a (f^b)^*) = δ_{ab} ∏ a_k!/k^{a_k} β^{-|a|}.
fn gaussian_oracle(p: &MultiIndex, q: &MultiIndex) -> MomentPolynomial {
    let vars = p.deg().max(q.deg()) as usize;
    let (xp, xq) = (x_monomial(p, vars), x_monomial(q, vars));
    let mut coeffs = vec![Rat::zero(); 2 * vars + 1];
    for (e, cp) in &xp {
        let Some(cq) = xq.get(e) else { continue };
        let mut w = cp * cq;
        for (k, &a) in e.iter().enumerate().skip(1) {
            w = w * fact(a) * Rat::int(k as i64).pow(a).recip().unwrap();
        }
        let total: u32 = e.iter().sum();
        coeffs[total as usize] += w;
    }
    MomentPolynomial::new(coeffs)
}

// ---------- criteria ----------

fn c1_variance_identity() -> Outcome {
    let start = Instant::now();
    for n in 1..=10 {
        let d = MultiIndex::delta(n);
        let (g, v) = (gaussian_x_moment(&d, &d), variance_pmf(n));
        ensure(g == v, || format!("n = {n}: {g} vs {v}"))?;
    }
    ensure(
        variance_pmf(1) == MomentPolynomial::monomial(Rat::one(), 1),
        || "n = 1 anchor".into(),
    )?;
    let three = variance_pmf(3);
    ensure(
        three.coeff(3) == Rat::frac(1, 6)
            && three.coeff(2) == Rat::frac(1, 2)
            && three.coeff(1) == Rat::frac(1, 3),
        || format!("n = 3 anchor: {three}"),
    )?;
    within(start, Duration::from_secs(10))?;
    Ok(format!("n = 1..10 exact, {:?}", start.elapsed()))
}

fn c2_raw_equivalence() -> Outcome {
    let start = Instant::now();
    let pairs = all_pairs(5);
    for (p, q) in &pairs {
        let raw = gaussian_x_moment_raw(p, q).map_err(|e| e.to_string())?;
        let fast = gaussian_x_moment(p, q);
        ensure(raw == fast, || format!("({p}, {q}): raw {raw} vs {fast}"))?;
    }
    within(start, Duration::from_secs(120))?;
    Ok(format!(
        "{} pairs with deg <= 5, {:?}",
        pairs.len(),
        start.elapsed()
    ))
}

fn c3_worked_examples() -> Outcome {
    let two = mi("2:2");
    let expected = MomentPolynomial::new(vec![
        Rat::zero(),
        Rat::zero(),
        Rat::frac(1, 2),
        Rat::one(),
        Rat::frac(3, 2),
    ]);
    let got = gaussian_x_moment(&two, &two);
    ensure(got == expected, || format!("x_2^2: {got}"))?;
    ensure(gaussian_oracle(&two, &two) == expected, || {
        "x_2^2 oracle".into()
    })?;

    let x1x2 = mi("1:1,2:1");
    let oracle = gaussian_oracle(&x1x2, &x1x2);
    let got = gaussian_x_moment(&x1x2, &x1x2);
    ensure(got == oracle, || {
        format!("x_1x_2: engine {got}, oracle {oracle}")
    })?;
    let quoted = MomentPolynomial::new(vec![
        Rat::zero(),
        Rat::zero(),
        Rat::frac(1, 4),
        Rat::frac(3, 4),
    ]);
    let note = if oracle == quoted {
        "x_1x_2 reproduces the quoted 3/4, 1/4".to_string()
    } else {
        format!("x_1x_2 = {oracle} by oracle and engine; the quoted 3/4 b^-3 + 1/4 b^-2 is off by a factor 2")
    };

    let pairs = all_pairs(4);
    for (p, q) in &pairs {
        let (e, o) = (gaussian_x_moment(p, q), gaussian_oracle(p, q));
        ensure(e == o, || format!("({p}, {q}): engine {e}, oracle {o}"))?;
    }
    Ok(format!(
        "x_2^2 exact; oracle agrees on {} pairs with deg <= 4; {note}",
        pairs.len()
    ))
}

fn c4_recursion_and_pmf() -> Outcome {
    let mut g = vec![MomentPolynomial::one()];
    let mut v = vec![MomentPolynomial::one()];
    for n in 1..=10u32 {
        let d = MultiIndex::delta(n);
        let step = |prev: &[MomentPolynomial]| {
            prev.iter()
                .fold(MomentPolynomial::zero(), |acc, x| acc.add(x))
                .shift()
                .scale(&Rat::frac(1, n as i64))
        };
        let (rec_g, rec_v) = (step(&g), step(&v));
        let gn = gaussian_x_moment(&d, &d);
        ensure(gn == rec_g, || format!("recursion fails at n = {n}"))?;
        ensure(variance_pmf(n) == rec_v, || {
            format!("product form fails the recursion at n = {n}")
        })?;
        g.push(gn);
        v.push(variance_pmf(n));
    }
    for n in 2..=12u32 {
        let a = a_coefficients(n).map_err(|e| e.to_string())?;
        let total: Rat = a.iter().sum();
        ensure(total.is_one(), || format!("sum of a_k^({n}) = {total}"))?;
        let odd: Rat = partitions(n)
            .iter()
            .filter(|l| l.size() % 2 == 1)
            .map(haar_weight)
            .sum();
        ensure(odd == Rat::frac(1, 2), || {
            format!("odd half-sum at n = {n} is {odd}")
        })?;
    }
    let pairs = all_pairs(5);
    for (p, q) in &pairs {
        let m = gaussian_x_moment(p, q);
        ensure(m.coeffs().iter().all(|c| !c.is_negative()), || {
            format!("negative coefficient for ({p}, {q})")
        })?;
        ensure(m.degree().is_none_or(|k| k <= p.deg() as usize), || {
            format!("degree too high for ({p}, {q})")
        })?;
    }
    Ok(format!(
        "recursion n <= 10, pmf n = 2..12, positivity on {} pairs",
        pairs.len()
    ))
}

fn c5_multiplicity_free() -> Outcome {
    let mut count = 0;
    for d in 1..=5 {
        let delta = MultiIndex::delta(d);
        for p in partitions(d) {
            let (a, b) = (multiplicity_free_moment(&p), gaussian_x_moment(&p, &delta));
            ensure(a == b, || format!("p = {p}: {a} vs {b}"))?;
            count += 1;
        }
    }
    Ok(format!("{count} multi-indices with deg <= 5"))
}

fn c6_cn_identity() -> Outcome {
    let start = Instant::now();
    let betas = [Rat::frac(1, 2), Rat::one(), Rat::int(2)];
    let mut cases: Vec<(MultiIndex, MultiIndex)> = (1..=4)
        .map(|n| (MultiIndex::delta(n), MultiIndex::delta(n)))
        .collect();
    cases.push((mi("1:1,2:1"), mi("3:1")));
    cases.push((mi("1:2"), mi("2:1")));
    let mut worst = 0.0f64;
    for (p, q) in &cases {
        let rep = verify_cn_identity(p, q, &betas, 10_000).map_err(|e| e.to_string())?;
        for row in &rep.rows {
            ensure(row.pass, || {
                format!(
                    "({p}, {q}) at beta {}: difference {} > 10 x tail {}",
                    row.beta, row.difference, row.alpha.tail_estimate
                )
            })?;
            if !row.alpha.tail_estimate.is_zero() {
                worst =
                    worst.max((row.difference.abs() / row.alpha.tail_estimate.clone()).to_f64());
            }
        }
    }
    let n = 10_000i64;
    for beta in &betas {
        let got = alpha_x_moment(&MultiIndex::delta(1), &MultiIndex::delta(1), beta, n as u32)
            .map_err(|e| e.to_string())?
            .value;
        let inv = beta.recip().unwrap();
        let expected = &inv - &inv * (beta * &Rat::int(n) + Rat::one()).recip().unwrap();
        ensure(got == expected, || {
            format!("n = 1 telescoping at beta {beta}: {got}")
        })?;
    }
    within(start, Duration::from_secs(300))?;
    Ok(format!(
        "{} cases x 3 betas at N = 10^4, worst |difference|/tail = {worst:.3}, {:?}",
        cases.len(),
        start.elapsed()
    ))
}

fn multiplicity_vectors(slots: usize, max_size: u32) -> Vec<MultiplicityVector> {
    fn rec(k: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiplicityVector>) {
        if k == cur.len() {
            out.push(MultiplicityVector::from_dense(cur.clone()));
            return;
        }
        for c in 0..=left {
            cur[k] = c;
            rec(k + 1, left - c, cur, out);
        }
        cur[k] = 0;
    }
    let mut out = Vec::new();
    rec(0, max_size, &mut vec![0; slots], &mut out);
    out
}

fn c7_graph_tuple_equality() -> Outcome {
    let mut checked = 0u64;
    let mut nonzero = 0u64;
    for d in 1..=4u32 {
        // each side has at most d index pairs, so |m| <= 2d
        let ms = multiplicity_vectors(7, 2 * d);
        let ps = partitions(d);
        for m in ms.iter().filter(|m| !m.is_empty()) {
            let top = m.max_support().unwrap();
            for p in &ps {
                for q in &ps {
                    let t = count_tuples(p, q, m, top);
                    let g = c_via_graphs(p, q, m).map_err(|e| e.to_string())?;
                    ensure(t == g, || {
                        format!("({p}, {q}, m = {m}): tuples {t}, graphs {g}")
                    })?;
                    checked += 1;
                    nonzero += u64::from(t > 0);
                }
            }
        }
    }
    let spot = mv("1:1,2:1,5:2,7:2");
    let eights = partitions(8);
    let mut spot_total = 0;
    for p in &eights {
        for q in &eights {
            let t = count_tuples(p, q, &spot, 7);
            let g = c_via_graphs(p, q, &spot).map_err(|e| e.to_string())?;
            ensure(t == g, || {
                format!("m = {spot} with ({p}, {q}): tuples {t}, graphs {g}")
            })?;
            spot_total += t;
        }
    }
    ensure(spot_total > 0, || {
        format!("m = {spot} admits no degree-8 families")
    })?;
    Ok(format!(
        "{checked} triples ({nonzero} nonzero); m = {spot}: {spot_total} families over deg-8 pairs"
    ))
}

fn random_alpha(rng: &mut ChaCha8Rng, n: usize, max_mod: f64) -> VerblunskySeq {
    let values = (0..n)
        .map(|_| {
            Complex64::from_polar(
                max_mod * rng.random::<f64>().sqrt(),
                rng.random_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    VerblunskySeq::new(values).unwrap()
}

fn c8_volume_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for k in 0..20 {
        let alpha = random_alpha(&mut rng, 1 + k % 4, 0.9);
        let r = jacobian_determinant(&alpha, JacobianMode::FiniteDifference)
            .map_err(|e| e.to_string())?;
        ensure(r.relative_gap() <= 1e-6, || {
            format!("{alpha:?}: gap {}", r.relative_gap())
        })?;
        worst = worst.max(r.relative_gap());
    }
    for k in 0..12 {
        let n = 1 + k % 3;
        let alpha: Vec<ComplexRat> = (0..n)
            .map(|_| loop {
                let (a, b) = (rng.random_range(-7i64..=7), rng.random_range(-7i64..=7));
                if a * a + b * b < 64 {
                    break ComplexRat::new(Rat::frac(a, 8), Rat::frac(b, 8));
                }
            })
            .collect();
        let (det, vol) = jacobian_determinant_exact(&alpha).map_err(|e| e.to_string())?;
        ensure(det == vol, || format!("exact mode: {det} vs {vol}"))?;
    }
    Ok(format!(
        "20 random points, worst relative gap {worst:.2e}; 12 exact points equal"
    ))
}

fn c9_szego() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for k in 0..40 {
        let alpha = random_alpha(&mut rng, 1 + k % 4, 0.5);
        let gap = szego_identity_gap(&alpha, 200);
        ensure(gap <= 1e-8, || format!("{alpha:?}: gap {gap}"))?;
        worst = worst.max(gap);
    }
    Ok(format!("40 random sequences, worst gap {worst:.2e}"))
}

fn c10_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    for k in 0..30 {
        let alpha = random_alpha(&mut rng, 1 + k % 6, 0.6);
        let density = measure_density(&alpha, 4096).map_err(|e| e.to_string())?;
        let moments = trig_moments(&density, alpha.len()).map_err(|e| e.to_string())?;
        let back = verblunsky_from_moments(&moments).map_err(|e| e.to_string())?;
        let err = (1..=alpha.len())
            .map(|j| (back.get(j) - alpha.get(j)).norm())
            .fold(0.0, f64::max);
        ensure(err <= 1e-9, || format!("{alpha:?}: error {err}"))?;
        worst = worst.max(err);
    }
    Ok(format!("30 random sequences, worst error {worst:.2e}"))
}

fn c11_monte_carlo() -> Outcome {
    let mut cases = vec![];
    for n in 1..=3 {
        cases.push((MultiIndex::delta(n), MultiIndex::empty()));
        cases.push((MultiIndex::delta(n), MultiIndex::delta(n)));
    }
    cases.push((mi("1:2"), MultiIndex::empty()));
    let threads = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(8);
    let mut worst = 0.0f64;
    let mut seed = 1100;
    for side in [Side::Gaussian, Side::Alpha] {
        for beta in [Rat::frac(1, 2), Rat::one()] {
            for (p, q) in &cases {
                seed += 1;
                let params = McParams {
                    side,
                    p: p.clone(),
                    q: q.clone(),
                    beta: beta.clone(),
                    n_trunc: 200,
                    samples: 100_000,
                    seed: Seed(seed),
                    threads,
                };
                let c = mc_x_moment(&params).map_err(|e| e.to_string())?;
                ensure(c.pass, || {
                    format!(
                        "{side:?} ({p}, {q}) beta {beta}: z = {:.2}, mean {}, exact {}",
                        c.z_score, c.stats.mean, c.exact_sampled
                    )
                })?;
                worst = worst.max(c.z_score);
            }
        }
    }
    Ok(format!(
        "{} checks at 10^5 samples, worst z = {worst:.2}",
        2 * 2 * cases.len()
    ))
}

fn c12_pushforward() -> Outcome {
    let base = PushforwardParams {
        beta: 1.0,
        modes: 256,
        radius: 0.995,
        samples: 2000,
        max_alpha: 3,
        seed: Seed(12),
        threads: std::thread::available_parallelism()
            .map_or(1, |n| n.get())
            .min(8),
        grid: None,
        allow_large_beta: false,
    };
    let study = pushforward_doubling_study(&base, 3).map_err(|e| e.to_string())?;
    let levels: Vec<String> = study
        .iter()
        .map(|l| {
            let a1 = &l.result.rows[0];
            format!(
                "(modes {}, r {}) E|a1|^2 = {:.4} +- {:.4}",
                l.modes, l.radius, a1.mean_abs_sq.mean.re, a1.mean_abs_sq.stderr
            )
        })
        .collect();
    let first = &study[0].result.rows[0];
    let summary = format!(
        "rel. error {:.3} at base; doubling: {}",
        first.relative_error,
        levels.join("; ")
    );
    if first.relative_error <= 0.1 {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, bool); 12] = [
        ("1 exact variance identity", c1_variance_identity, true),
        ("2 raw/partition equivalence", c2_raw_equivalence, true),
        (
            "3 worked examples and Gaussian-integral oracle",
            c3_worked_examples,
            true,
        ),
        ("4 recursion and pmf properties", c4_recursion_and_pmf, true),
        ("5 multiplicity-free moments", c5_multiplicity_free, true),
        (
            "6 alpha/Gaussian identity at N = 10^4",
            c6_cn_identity,
            true,
        ),
        (
            "7 graph/tuple count equality",
            c7_graph_tuple_equality,
            true,
        ),
        ("8 volume identity", c8_volume_identity, true),
        ("9 Szego identity", c9_szego, true),
        ("10 measure round trip", c10_round_trip, true),
        ("11 Monte Carlo consistency", c11_monte_carlo, true),
        ("12 pushforward (experimental)", c12_pushforward, false),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (name, run, fatal) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .unwrap_or_else(|| "panicked".into()))
        });
        let label = match (&outcome, fatal) {
            (Ok(_), true) => "PASS",
            (Ok(_), false) => "PASS (experimental)",
            (Err(_), true) => "FAIL",
            (Err(_), false) => "FAIL (experimental, non-fatal)",
        };
        let detail = outcome.as_ref().unwrap_or_else(|e| e);
        println!("criterion {name}: {label} -- {detail}");
        if outcome.is_err() && fatal {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
