use std::collections::BTreeSet;

use arboreal::density::{
    density_exact, density_finite_level, density_of_elements, mu, mu_unfold_check, DensityValue,
    LiftMode, MuInput,
};
use arboreal::groupengine::{Ambient, AmbientKind, Subgroup, SubgroupCatalog};
use arboreal::modmatrix::{
    affine_inv, affine_mul, agl2_order, det_mod, row_membership, AffineElement, Mat2, Modulus,
};
use arboreal::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn all_elements(md: Modulus) -> Vec<AffineElement> {
    let n = md.n() as i64;
    let mut out = Vec::new();
    for code in 0..n.pow(6) {
        let e: [i64; 6] = std::array::from_fn(|i| code / n.pow(i as u32) % n);
        if let Ok(g) = AffineElement::new(md, [e[4], e[5]], [e[0], e[1], e[2], e[3]]) {
            out.push(g);
        }
    }
    out
}

fn mu_of(g: &AffineElement, index: u128) -> DensityValue {
    mu(&MuInput::new(g.v(), g.m(), g.modulus(), index).unwrap()).unwrap()
}

/// Which dispatch branch the first step takes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Branch {
    Identity,
    NoFixedPoint,
    Recurse,
    Regular,
    Degenerate,
}

fn branch(g: &AffineElement) -> Branch {
    let md = g.modulus();
    let (v, m) = (g.v(), g.m());
    let ell = md.ell();
    if g.is_identity() {
        return Branch::Identity;
    }
    if !row_membership(&v, &m, &md).member {
        return Branch::NoFixedPoint;
    }
    if v.iter().all(|x| x % ell == 0) && m.minus_identity(&md).is_zero_mod_ell(&md) {
        return Branch::Recurse;
    }
    if det_mod(&m.minus_identity(&md), &md) != 0 {
        Branch::Regular
    } else {
        Branch::Degenerate
    }
}

#[test]
fn mu_at_level_one() {
    let md = Modulus::new(2, 1).unwrap();
    assert_eq!(
        mu_of(&AffineElement::identity(md), 1),
        DensityValue::new(1, 42)
    );
    // M − I = (1, 1; 1, 0) is invertible mod 2.
    for v in [[0, 0], [1, 0], [0, 1], [1, 1]] {
        let g = AffineElement::new(md, v, [0, 1, 1, 1]).unwrap();
        assert_eq!(mu_of(&g, 1), DensityValue::new(1, 24));
    }
    // M − I = (0, 1; 0, 0) has row space {(0, 0), (0, 1)}.
    let g = AffineElement::new(md, [1, 0], [1, 1, 0, 1]).unwrap();
    assert_eq!(mu_of(&g, 1), DensityValue::zero());
    assert!(MuInput::new([0, 0], Mat2::IDENTITY, Modulus::new(2, 0).unwrap(), 1).is_err());
    assert!(MuInput::new([0, 0], Mat2::IDENTITY, md, 5).is_err());
}

#[test]
fn full_group_densities_agree_across_levels() {
    let want = DensityValue::new(11, 21);
    for level in 1..=2 {
        let md = Modulus::new(2, level).unwrap();
        let elems = all_elements(md);
        assert_eq!(elems.len() as u128, agl2_order(2, level));
        let packed = elems.iter().map(|g| (g.v(), g.m()));
        assert_eq!(
            density_of_elements(packed, &md, 1).unwrap(),
            want,
            "level {level}"
        );
    }
    let full8 = Subgroup::ambient_group(Ambient::new(AmbientKind::Full, 3).unwrap());
    assert_eq!(full8.index_in_agl(), 1);
    assert_eq!(density_exact(&full8), want);
}

#[test]
fn catalog_densities() {
    assert_eq!(
        density_exact(&Subgroup::gamma0(3).unwrap()),
        DensityValue::new(5, 21)
    );
    let cat = SubgroupCatalog::build(3).unwrap();
    let row58 = cat.subgroup(58).unwrap();
    assert_eq!(density_exact(&row58), DensityValue::new(1, 14));
    let all: BTreeSet<DensityValue> = cat.classes.iter().map(|c| c.density_value()).collect();
    assert_eq!(all.len(), 21);
    assert_eq!(all.first(), Some(&DensityValue::new(1, 14)));
    assert_eq!(all.last(), Some(&DensityValue::new(89, 168)));
    for c in &cat.classes {
        assert_eq!(
            density_exact(&cat.subgroup(c.id).unwrap()),
            c.density_value(),
            "class {}",
            c.id
        );
    }
}

#[test]
fn finite_level_counts() {
    let full2 = Subgroup::ambient_group(Ambient::new(AmbientKind::Full, 1).unwrap());
    assert_eq!(full2.order(), 24);
    assert_eq!(
        density_finite_level(&full2, 1, LiftMode::Exhaustive).unwrap(),
        DensityValue::new(5, 8)
    );

    // With k = r the count is the fixed-point fraction of the group itself.
    let root = Subgroup::gamma0(3).unwrap();
    let direct = root
        .elements()
        .filter(|x| root.arith().has_fixed_point(*x))
        .count() as i64;
    let k3 = density_finite_level(&root, 3, LiftMode::Exhaustive).unwrap();
    assert_eq!(k3, DensityValue::new(direct, root.order() as i64));

    let exact = DensityValue::new(5, 21).to_f64();
    let k4 = density_finite_level(&root, 4, LiftMode::Exhaustive).unwrap();
    assert!(
        (k4.to_f64() - exact).abs() < (k3.to_f64() - exact).abs(),
        "k3 {k3} k4 {k4}"
    );

    assert!(matches!(
        density_finite_level(&root, 6, LiftMode::Exhaustive),
        Err(Error::LiftBudget { .. })
    ));
    let sampled = density_finite_level(
        &root,
        8,
        LiftMode::Sampled {
            samples: 20_000,
            seed: 5,
        },
    )
    .unwrap();
    assert!((sampled.to_f64() - exact).abs() < 0.03);
    assert_eq!(
        sampled,
        density_finite_level(
            &root,
            8,
            LiftMode::Sampled {
                samples: 20_000,
                seed: 5
            }
        )
        .unwrap()
    );
}

#[test]
fn mu_is_conjugation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for (ell, level) in [(2u64, 2u32), (2, 3), (3, 1), (3, 2)] {
        let md = Modulus::new(ell, level).unwrap();
        let n = md.n() as i64;
        let mut random = || loop {
            let e: [i64; 6] = std::array::from_fn(|_| rng.gen_range(0..n));
            if let Ok(g) = AffineElement::new(md, [e[4], e[5]], [e[0], e[1], e[2], e[3]]) {
                return g;
            }
        };
        for _ in 0..300 {
            let (x, g) = (random(), random());
            let conj = affine_mul(&affine_mul(&g, &x).unwrap(), &affine_inv(&g)).unwrap();
            assert_eq!(mu_of(&x, 1), mu_of(&conj, 1), "ℓ={ell} r={level}");
        }
    }
}

#[test]
fn unfolding_is_consistent_on_every_branch() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for (ell, level) in [(2u64, 1u32), (2, 2), (3, 1), (3, 2)] {
        let md = Modulus::new(ell, level).unwrap();
        let mut elems = all_elements(md);
        if elems.len() > 20_000 {
            // Keep every element that recurses and a sample of the rest.
            elems.retain(|g| {
                matches!(branch(g), Branch::Recurse | Branch::Identity) || rng.gen_range(0..25) == 0
            });
        }
        let mut seen = BTreeSet::new();
        for g in &elems {
            seen.insert(branch(g));
            let input = MuInput::new(g.v(), g.m(), md, 1).unwrap();
            let check = mu_unfold_check(&input).unwrap();
            assert!(
                check.holds,
                "ℓ={ell} r={level} {g:?}: {} vs {}",
                check.direct, check.unfolded
            );
        }
        let expected: BTreeSet<Branch> = if level == 1 {
            [
                Branch::Identity,
                Branch::NoFixedPoint,
                Branch::Regular,
                Branch::Degenerate,
            ]
            .into()
        } else {
            [
                Branch::Identity,
                Branch::NoFixedPoint,
                Branch::Recurse,
                Branch::Regular,
                Branch::Degenerate,
            ]
            .into()
        };
        assert_eq!(seen, expected, "ℓ={ell} r={level}");
    }
}
