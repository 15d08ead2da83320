//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use uniqset_core::exactnum::{exp_i_rational, int, ratio, BallComplex, GaussianRational, Rational};
use uniqset_core::recovery::{mu_scan, recover_bruteforce, recover_sparse, BruteForceIndex, Certificate, PrecisionPolicy};
use uniqset_core::rounding::{encode_signal, is_member, ClassSpec, EncodingSpec, RoundingSpec};
use uniqset_core::spectral::{
    dft_exact, idft_exact, observe, root_ball, Domain, ExactSpectrum, ModulationSide, ModulationSpec, ObservationMap,
    Precision,
};
use uniqset_core::uniqueness::{
    lw_certify_nonzero, prime_minor_scan, transform_minor, verify_uniqueness, window_sweep, CheckMode, ScanFamily,
    TraceSpec, VerdictStatus,
};
use uniqset_core::Signal;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_unit(rng: &mut ChaCha8Rng) -> Rational {
    let den = rng.gen_range(1..=1000i64);
    ratio(rng.gen_range(0..den), den)
}

struct Instance {
    enc: EncodingSpec,
    sparsity: usize,
    x: Signal,
}

/// Random members of encodedY with at most `S` nonzero components, parts in [0, 1).
fn sparse_instances() -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut out = Vec::new();
    for &n in &[4usize, 8, 16, 64] {
        for &s in &[1usize, 2, 4, 8] {
            if s > n {
                continue;
            }
            for &nu in &[2u32, 10] {
                for _ in 0..17 {
                    let m = rng.gen_range(0..=3u32);
                    let enc = EncodingSpec::new(nu, m, n).unwrap();
                    let size = rng.gen_range(0..=s);
                    let mut idx: Vec<usize> = (0..n).collect();
                    for i in 0..size {
                        let j = rng.gen_range(i..n);
                        idx.swap(i, j);
                    }
                    let mut comps = vec![GaussianRational::zero(); n];
                    for &k in &idx[..size] {
                        let im = if rng.gen_bool(0.5) { random_unit(&mut rng) } else { Rational::zero() };
                        let mut z = GaussianRational::new(random_unit(&mut rng), im);
                        if z.is_zero() {
                            z = GaussianRational::real(ratio(1, 2));
                        }
                        comps[k] = z;
                    }
                    let x = encode_signal(&enc, &Signal::new(comps)).unwrap();
                    out.push(Instance { enc, sparsity: s, x });
                }
            }
        }
    }
    out
}

fn fourier(x: &Signal, s: usize) -> uniqset_core::spectral::SpectrumObservation {
    observe(x, Domain::Fourier, (0..s as i64).map(int).collect(), Precision::Exact).unwrap()
}

fn criterion_1() -> Outcome {
    let inst = sparse_instances();
    ensure(inst.len() >= 500, || format!("only {} instances", inst.len()))?;
    let mut bad = 0;
    for i in &inst {
        let bound = ClassSpec::encoded(i.enc, int(1), Some(i.sparsity)).unwrap();
        ensure(is_member(&bound, &i.x), || format!("sample outside class: {}", i.x))?;
        match recover_sparse(&fourier(&i.x, i.sparsity), &i.enc, i.sparsity) {
            Ok(r) if r.signal == i.x && r.certificate == Certificate::ExactMatch => {}
            _ => bad += 1,
        }
    }
    ensure(bad == 0, || format!("{bad} of {} signals not recovered exactly", inst.len()))?;
    Ok(format!("{} signals recovered bit-exactly", inst.len()))
}

fn criterion_2() -> Outcome {
    let policy = PrecisionPolicy::default();
    let (mut classes, mut members, mut literal) = (0, 0usize, 0);
    for n in 1..=8usize {
        for s in 1..=2usize.min(n) {
            for m in 0..=2u32 {
                let enc = EncodingSpec::new(2, m, n).unwrap();
                let class = ClassSpec::encoded(enc, int(1), Some(s)).unwrap();
                let map = ObservationMap::from_indices(n, None, Domain::Fourier, &(0..s).collect::<Vec<_>>()).unwrap();
                let index = BruteForceIndex::build(&class, map, 10_000_000).map_err(|e| e.to_string())?;
                classes += 1;
                members += index.members().len();
                let stride = (index.members().len() / 4).max(1);
                for (j, x) in index.members().iter().enumerate() {
                    let obs = fourier(x, s);
                    let sparse = recover_sparse(&obs, &enc, s).map_err(|e| format!("N={n} S={s} M={m} {x}: {e}"))?;
                    let survivors = index.survivors_of(x);
                    ensure(survivors.len() == 1 && *survivors[0] == sparse.signal, || {
                        format!("N={n} S={s} M={m}: {} survivors for {x}", survivors.len())
                    })?;
                    if j % stride == 0 {
                        let r = recover_bruteforce(&obs, &class, None, &policy, 10_000_000).map_err(|e| e.to_string())?;
                        ensure(r.signal == sparse.signal && r.certificate == Certificate::ExactMatch, || {
                            format!("literal scan disagrees on {x}")
                        })?;
                        literal += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{classes} classes, {members} members agree, {literal} literal scans"))
}

fn criterion_3() -> Outcome {
    let mut checked = 0u64;
    for n in 1..=16usize {
        let r = window_sweep(n, 4, 10_000_000).map_err(|e| e.to_string())?;
        ensure(r.all_nonzero, || format!("N={n}: zero minor at {:?}", r.zero_witness))?;
        checked += r.minors_checked;
    }
    Ok(format!("{checked} window determinants nonzero for N <= 16, m <= 4"))
}

fn criterion_4() -> Outcome {
    let mut checked = 0u64;
    for &p in &[5usize, 7, 11, 13] {
        for m in 1..=3 {
            let r = prime_minor_scan(p, m, false, 10_000_000).map_err(|e| e.to_string())?;
            ensure(r.all_nonzero, || format!("N={p} m={m}: zero minor {:?}", r.zero_witness))?;
            checked += r.minors_checked;
        }
    }
    let c = prime_minor_scan(4, 2, true, 10_000_000).map_err(|e| e.to_string())?;
    let w = c.zero_witness.clone().ok_or("composite control found no zero minor")?;
    ensure(!c.all_nonzero && c.family == ScanFamily::AllMinors { m: 2 }, || "bad composite report".into())?;
    ensure(transform_minor(4, &w.rows, &w.cols).is_zero(), || "witness minor is not zero".into())?;
    Ok(format!("{checked} prime minors nonzero; N=4 witness rows {:?} cols {:?} verified", w.rows, w.cols))
}

fn criterion_5() -> Outcome {
    let policy = PrecisionPolicy::default();
    let mut lines = Vec::new();
    for n in 2..=3usize {
        let class = ClassSpec::plain(RoundingSpec::new(2, 1).unwrap(), n, ratio(1, 2)).unwrap();
        for d in 1..n {
            for mu1 in 2..=3u32 {
                let m = ModulationSpec::new(d, RoundingSpec::new(2, mu1).unwrap(), n, ModulationSide::FrequencyObserved).unwrap();
                let trace = TraceSpec::indices(Domain::Fourier, &[d]);
                let v = verify_uniqueness(&class, Some(&m), &trace, &policy, CheckMode::Auto, 10_000_000)
                    .map_err(|e| e.to_string())?;
                ensure(v.status == VerdictStatus::Unique && v.undecided_pairs.is_empty(), || {
                    format!("N={n} d={d} mu1={mu1}: {:?}, {} undecided", v.status, v.undecided_pairs.len())
                })?;
                let z = TraceSpec { domain: Domain::Ztransform, points: vec![int(1)] };
                let vz = verify_uniqueness(&class, Some(&m), &z, &policy, CheckMode::Auto, 10_000_000)
                    .map_err(|e| e.to_string())?;
                ensure(vz.status == VerdictStatus::Unique && vz.undecided_pairs.is_empty(), || {
                    format!("modulated Z trace N={n} d={d} mu1={mu1}: {:?}", vz.status)
                })?;
                lines.push(v.checked + vz.checked);
            }
        }
        let z = TraceSpec { domain: Domain::Ztransform, points: vec![int(1)] };
        let v = verify_uniqueness(&class, None, &z, &policy, CheckMode::Auto, 10_000_000).map_err(|e| e.to_string())?;
        ensure(v.status == VerdictStatus::Unique && v.undecided_pairs.is_empty(), || {
            format!("Z trace on plain class N={n}: {:?}", v.status)
        })?;
        lines.push(v.checked);
    }
    let total: u64 = lines.iter().sum();
    Ok(format!("{} verdicts unique, {total} differences certified, 0 undecided at cap 2^14", lines.len()))
}

fn criterion_6() -> Outcome {
    let inst: Vec<Instance> = sparse_instances().into_iter().filter(|i| i.enc.n <= 16).collect();
    let mut failing_rows = 0;
    for i in &inst {
        let depth = i.enc.big_m + i.enc.n as u32;
        let mus: Vec<u32> = (0..=depth + 2).collect();
        let rep = mu_scan(&i.x, &i.enc, i.sparsity, &ratio(1, 100), &mus).map_err(|e| e.to_string())?;
        for r in &rep.rows {
            if r.mu >= depth {
                ensure(r.recovered_exactly && r.max_error == Some(Rational::zero()), || {
                    format!("N={} M={} mu={}: not exact", i.enc.n, i.enc.big_m, r.mu)
                })?;
            }
        }
        if !i.x.is_zero() {
            let row0 = &rep.rows[0];
            ensure(row0.mu == 0 && !row0.recovered_exactly, || "mu = 0 row does not fail".into())?;
            failing_rows += 1;
        }
    }
    Ok(format!("{} scans stable from M+N, {failing_rows} mu=0 failures recorded", inst.len()))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);
    for t in 0..1000 {
        let n = rng.gen_range(1..=64usize);
        let x = Signal::new(
            (0..n)
                .map(|_| {
                    GaussianRational::new(
                        ratio(rng.gen_range(-100..=100), rng.gen_range(1..=60)),
                        ratio(rng.gen_range(-100..=100), rng.gen_range(1..=60)),
                    )
                })
                .collect(),
        );
        let s: ExactSpectrum = dft_exact(&x);
        ensure(idft_exact(&s).as_ref() == Ok(&x), || format!("round trip failed on sample {t}"))?;
        let lhs: Rational = x.iter().map(|z| z.norm_sqr()).fold(Rational::zero(), |a, b| a + b);
        ensure(s.energy() == lhs, || format!("Parseval failed on sample {t}"))?;
    }
    Ok("1000 signals: exact inverse and exact Parseval".into())
}

fn criterion_8() -> Outcome {
    let policy = PrecisionPolicy::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    let mut zeros: Vec<Box<dyn Fn(u32) -> BallComplex>> = Vec::new();
    for j in 0..100 {
        let a = ratio(rng.gen_range(-40..40), rng.gen_range(1..8));
        let b = ratio(rng.gen_range(-40..40), rng.gen_range(1..8));
        let n = rng.gen_range(2..12usize);
        zeros.push(match j % 4 {
            // e^{i(a+b)} - e^{ia} e^{ib}
            0 => Box::new(move |p| exp_i_rational(&(&a + &b), p).sub(&exp_i_rational(&a, p).mul(&exp_i_rational(&b, p)))),
            // sum of the N-th roots of unity
            1 => Box::new(move |p| (0..n as i64).fold(BallComplex::zero(p), |acc, k| acc.add(&root_ball(n, k, p)))),
            // 1 + e^{ia} (-1) e^{-ia}
            2 => Box::new(move |p| BallComplex::one(p).sub(&exp_i_rational(&a, p).mul(&exp_i_rational(&-a.clone(), p)))),
            // e^{ia} e^{-ib} - e^{i(a-b)}
            _ => Box::new(move |p| exp_i_rational(&a, p).mul(&exp_i_rational(&-b.clone(), p)).sub(&exp_i_rational(&(&a - &b), p))),
        });
    }
    for (j, z) in zeros.iter().enumerate() {
        ensure(!lw_certify_nonzero(z, &policy).is_nonzero(), || format!("zero expression {j} certified nonzero"))?;
    }
    // collision witnesses from contrived traces
    let mut witnesses = 0;
    let cases: Vec<(ClassSpec, TraceSpec)> = vec![
        (ClassSpec::plain(RoundingSpec::new(2, 1).unwrap(), 3, ratio(1, 2)).unwrap(), TraceSpec::indices(Domain::Fourier, &[1])),
        (ClassSpec::plain(RoundingSpec::new(2, 1).unwrap(), 2, int(1)).unwrap(), TraceSpec::indices(Domain::Time, &[1])),
        (ClassSpec::plain(RoundingSpec::new(3, 1).unwrap(), 2, ratio(2, 3)).unwrap(), TraceSpec { domain: Domain::Ztransform, points: vec![int(0)] }),
        (
            ClassSpec::encoded(EncodingSpec::new(2, 1, 4).unwrap(), int(1), Some(2)).unwrap(),
            TraceSpec::indices(Domain::Fourier, &[2]),
        ),
    ];
    for (class, trace) in cases {
        let v = verify_uniqueness(&class, None, &trace, &policy, CheckMode::Auto, 10_000_000).map_err(|e| e.to_string())?;
        ensure(v.status == VerdictStatus::Collision, || format!("expected a collision on {trace:?}"))?;
        let w = v.witness.ok_or("collision without witness")?;
        let map = ObservationMap::new(class.n, None, trace.domain, trace.points.clone()).unwrap();
        let (a, b) = (map.observe(&w.first, Precision::Exact), map.observe(&w.second, Precision::Exact));
        ensure(w.first != w.second && class.contains(&w.first) && class.contains(&w.second), || "bad witness pair".into())?;
        ensure(a.is_exact() && a == b, || "witness traces differ".into())?;
        witnesses += 1;
    }
    Ok(format!("{} zero expressions never certified, {witnesses} collision witnesses re-verified", zeros.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("sparse round-trip", criterion_1),
        ("oracle equivalence", criterion_2),
        ("window determinants", criterion_3),
        ("prime minors", criterion_4),
        ("singleton uniqueness", criterion_5),
        ("rounding robustness", criterion_6),
        ("transform exactness", criterion_7),
        ("soundness guards", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {} [{name}]: PASS ({msg}) {secs:.1}s", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {} [{name}]: FAIL ({msg}) {secs:.1}s", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
