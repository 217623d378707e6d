//! End-to-end acceptance run. Prints one `PASS`/`FAIL` line per criterion and
//! fails if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use arboreal::classifier::classify;
use arboreal::classifier::table::ROWS;
use arboreal::density::{
    density_exact, density_finite_level, mu_unfold_check, DensityValue, LiftMode, MuInput,
};
use arboreal::ecurve::{
    curve_from_params, empirical_density, primes_up_to, CurveParams, ReducedCurve, ReducedPoint,
};
use arboreal::groupengine::{are_conjugate, Ambient, AmbientKind, Subgroup, SubgroupCatalog};
use arboreal::modmatrix::{affine_mul, embed_3x3, row_membership, AffineElement, Mat2, Modulus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn exemplar(id: u8) -> CurveParams {
    let r = &ROWS[usize::from(id) - 1];
    curve_from_params(r.exemplar.0, r.exemplar.1, r.exemplar.2).unwrap()
}

fn enumerate_cli(modulus: &str, dir: &Path) -> Result<SubgroupCatalog, String> {
    let out = dir.join(format!("catalog{modulus}.json"));
    let dot = dir.join(format!("lattice{modulus}.dot"));
    let o = Command::new(env!("CARGO_BIN_EXE_arboreal"))
        .args([
            "enumerate",
            "--modulus",
            modulus,
            "--out",
            out.to_str().unwrap(),
            "--dot",
            dot.to_str().unwrap(),
        ])
        .output()
        .map_err(|e| e.to_string())?;
    check(o.status.success(), || {
        format!("enumerate --modulus {modulus} exited with {}", o.status)
    })?;
    SubgroupCatalog::load(&out).map_err(|e| e.to_string())
}

fn ac1_enumeration(dir: &Path) -> Verdict {
    let t = Instant::now();
    let c8 = enumerate_cli("8", dir)?;
    let hist: BTreeMap<u64, usize> = [(1, 1), (2, 16), (4, 30), (8, 16)].into();
    check(c8.classes.len() == 63, || {
        format!("modulus 8: {} classes", c8.classes.len())
    })?;
    check(c8.index_histogram() == hist, || {
        format!("modulus 8 histogram {:?}", c8.index_histogram())
    })?;
    let t8 = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let c16 = enumerate_cli("16", dir)?;
    check(c16.classes.len() == 63, || {
        format!("modulus 16: {} classes", c16.classes.len())
    })?;
    let t16 = t.elapsed().as_secs_f64();
    let ids8: BTreeSet<u32> = c8.classes.iter().map(|c| c.id).collect();
    let mut seen = BTreeSet::new();
    for class in &c16.classes {
        let h16 = c16.subgroup(class.id).map_err(|e| e.to_string())?;
        let h8 = h16.reduce_to(3).map_err(|e| e.to_string())?;
        // Full preimage: the kernel of reduction mod 8 has order 2⁶.
        check(h16.order() == h8.order() * 64, || {
            format!("modulus 16 class {} misses the mod-8 kernel", class.id)
        })?;
        check(h16 == h8.preimage(4).map_err(|e| e.to_string())?, || {
            format!("class {} is not a preimage", class.id)
        })?;
        let matches: Vec<u32> = c8
            .classes
            .iter()
            .filter(|c| c.order * 64 == class.order)
            .filter(|c| {
                let rep = c8.subgroup(c.id).unwrap();
                are_conjugate(&rep, &h8).unwrap().is_some()
            })
            .map(|c| c.id)
            .collect();
        check(matches.len() == 1, || {
            format!("class {} reduces to {matches:?}", class.id)
        })?;
        seen.insert(matches[0]);
    }
    check(seen == ids8, || {
        "reduction mod 8 is not a bijection on classes".into()
    })?;
    Ok(format!("63 classes at 8 ({t8:.1}s) and 16 ({t16:.1}s), histogram {{1:1, 2:16, 4:30, 8:16}}, bijective reduction"))
}

fn ac2_densities(c8: &SubgroupCatalog) -> Verdict {
    check(
        density_exact(&Subgroup::gamma0(3).unwrap()) == DensityValue::new(5, 21),
        || "root ≠ 5/21".into(),
    )?;
    let full = Subgroup::ambient_group(Ambient::new(AmbientKind::Full, 3).unwrap());
    check(density_exact(&full) == DensityValue::new(11, 21), || {
        "AGL₂(Z/8) ≠ 11/21".into()
    })?;
    let mut values = BTreeSet::new();
    for row in &ROWS {
        let h = c8.subgroup(u32::from(row.id)).map_err(|e| e.to_string())?;
        let d = density_exact(&h);
        let want = DensityValue::new(row.density.0, row.density.1);
        check(d == want, || format!("row {}: {d} ≠ {want}", row.id))?;
        values.insert(d);
    }
    check(values.len() == 21, || {
        format!("{} distinct densities", values.len())
    })?;
    let (min, max) = (values.first().unwrap(), values.last().unwrap());
    check(
        *min == DensityValue::new(1, 14) && *max == DensityValue::new(89, 168),
        || format!("range {min} .. {max}"),
    )?;
    Ok("5/21, 11/21 and all 63 row densities exact; 21 distinct values from 1/14 to 89/168".into())
}

fn ac3_classification() -> Verdict {
    for row in &ROWS {
        let r = classify(&exemplar(row.id)).map_err(|e| format!("row {}: {e}", row.id))?;
        check(r.minimal_row == row.id, || {
            format!("row {} exemplar classified as {}", row.id, r.minimal_row)
        })?;
    }
    Ok("all 63 exemplars classify to their own row".into())
}

fn ac4_desk_scan() -> Verdict {
    let tol = 0.006;
    let mut worst = (0.0f64, 0u8);
    for row in &ROWS {
        let report = empirical_density(&exemplar(row.id), 1_000_000).map_err(|e| e.to_string())?;
        check(report.primes_total == 78_498, || {
            format!("π(10⁶) = {}", report.primes_total)
        })?;
        let exact = DensityValue::new(row.density.0, row.density.1).to_f64();
        let err = (report.ratio.to_f64() - exact).abs();
        check(err <= tol, || {
            format!(
                "row {}: |{} − {exact:.6}| = {err:.6} > {tol}",
                row.id,
                report.ratio.decimal(6)
            )
        })?;
        if err > worst.0 {
            worst = (err, row.id);
        }
    }
    Ok(format!(
        "63 rows at x = 10⁶, max |err| {:.6} (row {}) ≤ {tol}",
        worst.0, worst.1
    ))
}

fn ac5_large_scan() -> Verdict {
    let reference = [
        (1u8, 0.237796),
        (2, 0.476216),
        (10, 0.142902),
        (49, 0.529399),
        (58, 0.0715225),
    ];
    let mut parts = Vec::new();
    for (id, want) in reference {
        let report = empirical_density(&exemplar(id), 10_000_000).map_err(|e| e.to_string())?;
        let got = report.ratio.to_f64();
        check((got - want).abs() <= 1e-3, || {
            format!("row {id}: {got:.6} vs reference {want}")
        })?;
        parts.push(format!("{id}:{got:.6}"));
    }
    Ok(format!(
        "x = 10⁷ within 10⁻³ of the reference values ({})",
        parts.join(" ")
    ))
}

fn naive_order(e: &ReducedCurve, pt: ReducedPoint) -> u64 {
    let (mut q, mut n) = (pt, 1);
    while !q.is_infinity() {
        q = e.add(q, pt);
        n += 1;
    }
    n
}

fn ac6_properties() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    // Embedding homomorphism.
    for level in 1..=4 {
        let md = Modulus::new(2, level).unwrap();
        let n = md.n() as i64;
        let mut random = || loop {
            let e: [i64; 6] = std::array::from_fn(|_| rng.gen_range(0..n));
            if let Ok(g) = AffineElement::new(md, [e[4], e[5]], [e[0], e[1], e[2], e[3]]) {
                return g;
            }
        };
        for _ in 0..1000 {
            let (g1, g2) = (random(), random());
            let (x, y) = (embed_3x3(&g1), embed_3x3(&g2));
            let prod: [[u64; 3]; 3] = std::array::from_fn(|i| {
                std::array::from_fn(|j| (0..3).map(|t| x[i][t] * y[t][j]).sum::<u64>() % md.n())
            });
            check(embed_3x3(&affine_mul(&g1, &g2).unwrap()) == prod, || {
                format!("embedding fails on {g1:?}, {g2:?}")
            })?;
        }
    }

    // Row membership against exhaustive search, ℓ = 2, r ≤ 3.
    for level in 1..=3 {
        let md = Modulus::new(2, level).unwrap();
        let n = md.n();
        for code in 0..n.pow(4) {
            let m = Mat2::new(
                code % n,
                code / n % n,
                code / n / n % n,
                code / n / n / n % n,
            );
            let a = m.minus_identity(&md);
            let mut reach = vec![false; (n * n) as usize];
            for x0 in 0..n {
                for x1 in 0..n {
                    reach[(((x0 * a.a + x1 * a.c) % n) * n + (x0 * a.b + x1 * a.d) % n) as usize] =
                        true;
                }
            }
            for v0 in 0..n {
                for v1 in 0..n {
                    let got = row_membership(&[v0, v1], &m, &md).member;
                    check(got == reach[(v0 * n + v1) as usize], || {
                        format!("row membership r={level} {m:?}")
                    })?;
                }
            }
        }
    }

    // ψ∘φ = [2] on random (curve, p, point) triples.
    let primes: Vec<u64> = primes_up_to(100_000)
        .into_iter()
        .filter(|&p| p > 3)
        .collect();
    let mut done = 0;
    while done < 100 {
        let e = exemplar(rng.gen_range(1..=63));
        let p = primes[rng.gen_range(0..primes.len())];
        let Ok(red) = e.reduce(p) else { continue };
        let pt = red.random_point(&mut rng);
        check(red.psi(red.phi(pt)) == red.add(pt, pt), || {
            format!("ψ∘φ ≠ [2] on {e} mod {p}")
        })?;
        done += 1;
    }

    // Odd order against the naive order, every good p < 2000, every exemplar.
    let small = primes_up_to(2000);
    let mut tested = 0;
    for row in &ROWS {
        let e = exemplar(row.id);
        for &p in small.iter().filter(|&&p| e.is_good_prime(p)) {
            let red = e.reduce(p).unwrap();
            let order = naive_order(&red, e.alpha_mod(p).unwrap());
            check(e.has_odd_order(p).unwrap() == (order % 2 == 1), || {
                format!("{e} mod {p}: order {order}")
            })?;
            tested += 1;
        }
    }

    // μ unfolding on every element at ℓ ∈ {2, 3}, r ∈ {1, 2} (sampled at 3², r = 2).
    for (ell, level) in [(2u64, 1u32), (2, 2), (3, 1), (3, 2)] {
        let md = Modulus::new(ell, level).unwrap();
        let n = md.n();
        for code in 0..n.pow(6) {
            if ell == 3 && level == 2 && code % 97 != 0 {
                continue;
            }
            let e: [u64; 6] = std::array::from_fn(|i| code / n.pow(i as u32) % n);
            let Ok(g) =
                AffineElement::from_parts(md, [e[4], e[5]], Mat2::new(e[0], e[1], e[2], e[3]))
            else {
                continue;
            };
            let input = MuInput::new(g.v(), g.m(), md, 1).unwrap();
            let c = mu_unfold_check(&input).map_err(|e| e.to_string())?;
            check(c.holds, || {
                format!("unfold fails at {g:?}: {} vs {}", c.direct, c.unfolded)
            })?;
        }
    }

    // Finite-level convergence for the root.
    let root = Subgroup::gamma0(3).unwrap();
    let exact = DensityValue::new(5, 21).to_f64();
    let k3 = density_finite_level(&root, 3, LiftMode::Exhaustive)
        .unwrap()
        .to_f64();
    let k4 = density_finite_level(&root, 4, LiftMode::Exhaustive)
        .unwrap()
        .to_f64();
    check((k4 - exact).abs() < (k3 - exact).abs(), || {
        format!("k=3 {k3:.6}, k=4 {k4:.6}")
    })?;

    Ok(format!(
        "embedding, row membership, ψ∘φ, odd order ({tested} prime/curve pairs), μ unfolding, k=4 closer than k=3 ({:.5} vs {:.5})",
        (k4 - exact).abs(),
        (k3 - exact).abs()
    ))
}

#[test]
fn acceptance() {
    let dir = tempfile::tempdir().unwrap();
    let mut results: Vec<(&str, Verdict)> = Vec::new();
    results.push(("AC1 enumeration", ac1_enumeration(dir.path())));
    let c8 = SubgroupCatalog::load(&dir.path().join("catalog8.json")).ok();
    results.push((
        "AC2 exact densities",
        c8.as_ref()
            .map_or_else(|| Err("no modulus-8 catalog".into()), ac2_densities),
    ));
    results.push(("AC3 classification", ac3_classification()));
    results.push(("AC4 scan at 10⁶", ac4_desk_scan()));
    results.push(("AC5 scan at 10⁷", ac5_large_scan()));
    results.push(("AC6 property suites", ac6_properties()));

    for (name, verdict) in &results {
        match verdict {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(reason) => println!("FAIL {name}: {reason}"),
        }
    }
    let failed: Vec<&str> = results
        .iter()
        .filter(|(_, v)| v.is_err())
        .map(|(n, _)| *n)
        .collect();
    assert!(failed.is_empty(), "failed: {failed:?}");
}
