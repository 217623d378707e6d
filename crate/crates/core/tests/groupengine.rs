use std::collections::BTreeMap;
use std::sync::OnceLock;

use arboreal::classifier::table::{row_spec, Batch, Multiplier};
use arboreal::groupengine::{
    are_conjugate, conjugate, frattini_subgroup, index2_subgroups, is_happy, star, Ambient,
    AmbientKind, CharacterSpace, Happiness, Numbering, Packed, Subgroup, SubgroupCatalog,
};
use arboreal::modmatrix::{AffineElement, Modulus};
use arboreal::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn catalog() -> &'static SubgroupCatalog {
    static CATALOG: OnceLock<SubgroupCatalog> = OnceLock::new();
    CATALOG.get_or_init(|| SubgroupCatalog::build(3).expect("level-3 catalog"))
}

fn root() -> Subgroup {
    Subgroup::gamma0(3).unwrap()
}

fn det8(x: Packed) -> u32 {
    let [a, b, c, d, ..] = x.entries();
    (a * d + 64 - b * c) & 7
}

#[test]
fn closure_orders() {
    let md = Modulus::new(2, 3).unwrap();
    assert_eq!(
        Subgroup::closure(&[AffineElement::identity(md)], 3)
            .unwrap()
            .order(),
        1
    );
    assert_eq!(root().order(), 32768);
    let gens = root().affine_generators();
    assert_eq!(Subgroup::closure(&gens, 3).unwrap().order(), 32768);
    let t = Subgroup::translations(3).unwrap();
    assert_eq!(t.order(), 64);
    assert!(t.elements().all(|x| x.parts().1.is_identity()));

    let odd_corner = AffineElement::new(md, [0, 0], [1, 0, 1, 1]).unwrap();
    assert!(matches!(
        Subgroup::closure(&[odd_corner], 3),
        Err(Error::OutsideAmbient(_))
    ));
}

#[test]
fn closure_orders_divide_the_ambient_order() {
    let g = root();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let elems = g.element_vec();
    for _ in 0..40 {
        let gens: Vec<Packed> = (0..rng.gen_range(1..4))
            .map(|_| elems[rng.gen_range(0..elems.len())])
            .collect();
        let h = Subgroup::generated(g.ambient(), &gens);
        assert_eq!(32768 % h.order(), 0);
        assert_eq!(h.order() as u128 * h.index_in_ambient(), 32768);
    }
}

#[test]
fn index_two_subgroup_counts() {
    let ambient = Ambient::new(AmbientKind::Gamma0, 3).unwrap();
    let order_two = Subgroup::generated(ambient, &[Packed::from_entries([1, 0, 0, 1, 4, 0])]);
    assert_eq!(order_two.order(), 2);
    assert_eq!(index2_subgroups(&order_two).unwrap().len(), 1);

    let g = root();
    let maximal = index2_subgroups(&g).unwrap();
    assert_eq!(maximal.len(), 31);
    let phi = frattini_subgroup(&g);
    for n in &maximal {
        assert_eq!(n.order() * 2, g.order());
        assert!(phi.is_subgroup_of(n));
    }

    let t1 = Subgroup::translations(1).unwrap();
    assert_eq!(t1.order(), 4);
    assert_eq!(index2_subgroups(&t1).unwrap().len(), 3);
}

#[test]
fn frattini_rank_matches_character_space() {
    let g = root();
    let mut subjects = vec![g.clone()];
    subjects.extend(index2_subgroups(&g).unwrap().into_iter().step_by(5));
    for h in subjects {
        let phi = frattini_subgroup(&h);
        let quotient = h.order() / phi.order();
        assert!(quotient.is_power_of_two());
        let rank = CharacterSpace::new(&h).unwrap().rank();
        assert_eq!(1u64 << rank, quotient);
        assert_eq!(index2_subgroups(&h).unwrap().len(), (1 << rank) - 1);
    }
}

#[test]
fn happy_predicate_examples() {
    let g = root();
    assert_eq!(is_happy(&g).unwrap(), Happiness::Happy);
    let halvable = g
        .filter(|x| x.entries()[4] & 1 == 0 && x.entries()[5] & 1 == 0)
        .unwrap();
    assert_eq!(halvable.gl2_image_order(), g.gl2_image_order());
    let verdict = is_happy(&halvable).unwrap();
    assert_eq!(verdict, Happiness::AlphaHalvable);
    assert_eq!(verdict.reason(), "α ∈ 2E(ℚ)");

    let t = Subgroup::translations(3).unwrap();
    let verdict = is_happy(&t).unwrap();
    assert_eq!(verdict, Happiness::ImageTooSmall);
    assert_eq!(verdict.reason(), "im ρ too small");

    let plus_t = g
        .filter(|x| {
            let [_, _, c, d, e, f] = x.entries();
            (e ^ (c >> 1)) & 1 == 0 && (f ^ (d.wrapping_sub(1) >> 1)) & 1 == 0
        })
        .unwrap();
    assert_eq!(is_happy(&plus_t).unwrap().reason(), "α+T ∈ 2E(ℚ)");
}

#[test]
fn star_is_an_index_two_operation() {
    let g = root();
    let maximal = index2_subgroups(&g).unwrap();
    let pos = |h: &Subgroup| maximal.iter().position(|m| m == h);
    for (i, n1) in maximal.iter().enumerate() {
        assert_eq!(star(n1, n1, &g).unwrap(), g);
        for n2 in &maximal[i + 1..] {
            let s = star(n1, n2, &g).unwrap();
            assert_eq!(s.order() * 2, g.order());
            assert!(pos(&s).is_some());
            assert_eq!(s, star(n2, n1, &g).unwrap());
        }
    }
    // Associativity: index-2 subgroups are kernels of characters, and `*`
    // adds characters, so the triple product is order independent.
    let table: Vec<Vec<usize>> = maximal
        .iter()
        .map(|x| {
            maximal
                .iter()
                .map(|y| {
                    if x == y {
                        usize::MAX
                    } else {
                        pos(&star(x, y, &g).unwrap()).unwrap()
                    }
                })
                .collect()
        })
        .collect();
    let mul = |i: usize, j: usize| {
        if i == usize::MAX {
            Some(j)
        } else if j == usize::MAX {
            Some(i)
        } else {
            Some(table[i][j])
        }
    };
    for i in 0..31 {
        for j in 0..31 {
            for k in 0..31 {
                let left = mul(table[i][j], k);
                let right = mul(i, table[j][k]);
                assert_eq!(left, right, "({i} * {j}) * {k}");
            }
        }
    }
    assert!(matches!(star(&g, &maximal[0], &g), Err(Error::NotIndexTwo)));
}

#[test]
fn star_of_determinant_subgroups() {
    let g = root();
    let m_neg = g.filter(|x| det8(x) & 3 == 1).unwrap();
    let m_two = g.filter(|x| matches!(det8(x), 1 | 7)).unwrap();
    let s = star(&m_neg, &m_two, &g).unwrap();
    assert_eq!(s.order() * 2, g.order());
    for x in g.elements() {
        assert_eq!(s.contains(x), m_neg.contains(x) == m_two.contains(x));
    }
    // det ≡ 1 or 3 (mod 8): the subgroup fixing √−2.
    assert!(s.elements().all(|x| matches!(det8(x), 1 | 3)));
}

#[test]
fn conjugacy_examples() {
    let g = root();
    let maximal = index2_subgroups(&g).unwrap();
    let h = &maximal[3];
    assert_eq!(are_conjugate(h, h).unwrap(), Some(Packed::IDENTITY));

    let full = Ambient::new(AmbientKind::Full, 3).unwrap();
    let everything: Vec<Packed> = full.elements().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mut checked = 0;
    while checked < 4 {
        let x = everything[rng.gen_range(0..everything.len())];
        let hx = conjugate(h, x);
        if hx.ambient().kind() != AmbientKind::Gamma0 {
            continue;
        }
        checked += 1;
        let w = are_conjugate(h, &hx)
            .unwrap()
            .expect("conjugates are conjugate");
        assert_eq!(conjugate(h, w), hx);
    }

    let (small, big) = maximal
        .iter()
        .find_map(|a| {
            maximal
                .iter()
                .find(|b| a.gl2_image_order() < b.gl2_image_order())
                .map(|b| (a, b))
        })
        .expect("two images of different size");
    assert_eq!(are_conjugate(small, big).unwrap(), None);
}

#[test]
fn level_three_enumeration() {
    let cat = catalog();
    assert_eq!(cat.classes.len(), 63);
    assert_eq!(cat.numbering, Numbering::Rows);
    let hist: BTreeMap<u64, usize> = [(1, 1), (2, 16), (4, 30), (8, 16)].into();
    assert_eq!(cat.index_histogram(), hist);
    assert_eq!(cat.children(1).len(), 16);
    for c in &cat.classes {
        for p in &c.parents {
            let parent = cat.class(*p).unwrap();
            assert!(parent.index < c.index);
            assert_eq!(c.index % parent.index, 0);
        }
        if c.id != 1 {
            assert!(!c.parents.is_empty(), "class {} has no parent", c.id);
        }
        let h = cat.subgroup(c.id).unwrap();
        assert!(is_happy(&h).unwrap().is_happy());
        assert_eq!(h.order() * c.index, 32768);
    }
}

#[test]
fn representatives_are_pairwise_non_conjugate() {
    let cat = catalog();
    let reps: Vec<Subgroup> = cat
        .classes
        .iter()
        .map(|c| cat.subgroup(c.id).unwrap())
        .collect();
    for i in 0..reps.len() {
        for j in i + 1..reps.len() {
            if reps[i].order() == reps[j].order() {
                assert_eq!(
                    are_conjugate(&reps[i], &reps[j]).unwrap(),
                    None,
                    "{} ~ {}",
                    i + 1,
                    j + 1
                );
            }
        }
    }
}

#[test]
fn index_two_rows_are_h2_star_m_d() {
    let cat = catalog();
    let g = root();
    let h2 = g.filter(|x| x.entries()[4] & 1 == 0).unwrap();
    let m_neg = g.filter(|x| det8(x) & 3 == 1).unwrap();
    let m_two = g.filter(|x| matches!(det8(x), 1 | 7)).unwrap();
    let m_b = g.filter(|x| x.entries()[2] & 3 == 0).unwrap();
    let m_disc = g.filter(|x| x.entries()[1] & 1 == 0).unwrap();
    assert!(are_conjugate(&h2, &cat.subgroup(2).unwrap())
        .unwrap()
        .is_some());

    for id in 3u8..=17 {
        let spec = row_spec(id).unwrap();
        assert_eq!(spec.batch, Batch::Base);
        let bits = spec.multiplier.0;
        let mut factors = Vec::new();
        for (flag, m) in [
            (Multiplier::NEG, &m_neg),
            (Multiplier::TWO, &m_two),
            (Multiplier::B, &m_b),
            (Multiplier::DISC, &m_disc),
        ] {
            if bits & flag != 0 {
                factors.push(m);
            }
        }
        let mut m_d = factors[0].clone();
        for f in &factors[1..] {
            m_d = star(&m_d, f, &g).unwrap();
        }
        let built = star(&h2, &m_d, &g).unwrap();
        let rep = cat.subgroup(id as u32).unwrap();
        assert!(are_conjugate(&built, &rep).unwrap().is_some(), "row {id}");
    }
}

#[test]
fn pruned_branches_have_no_happy_descendants() {
    let g = root();
    // One pruned subgroup per failure reason, from the first two levels.
    let mut pruned: Vec<(Happiness, Subgroup)> = Vec::new();
    let mut consider = |h: Subgroup| {
        let verdict = is_happy(&h).unwrap();
        if !verdict.is_happy() && pruned.iter().all(|(v, _)| *v != verdict) {
            pruned.push((verdict, h));
        }
    };
    for n in index2_subgroups(&g).unwrap() {
        if is_happy(&n).unwrap().is_happy() {
            index2_subgroups(&n)
                .unwrap()
                .into_iter()
                .for_each(&mut consider);
        } else {
            consider(n);
        }
    }
    assert_eq!(
        pruned.len(),
        3,
        "{:?}",
        pruned.iter().map(|(v, _)| v).collect::<Vec<_>>()
    );
    for (verdict, n) in &pruned {
        for m in index2_subgroups(n).unwrap() {
            assert!(
                !is_happy(&m).unwrap().is_happy(),
                "below a {verdict} subgroup"
            );
            for l in index2_subgroups(&m).unwrap().into_iter().step_by(3) {
                assert!(
                    !is_happy(&l).unwrap().is_happy(),
                    "two below a {verdict} subgroup"
                );
            }
        }
    }
}

#[test]
fn catalog_round_trips_and_exports() {
    let cat = catalog();
    let json = cat.to_json().unwrap();
    let back = SubgroupCatalog::from_json(&json).unwrap();
    assert_eq!(&back, cat);
    assert_eq!(back.to_json().unwrap(), json);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("catalog.json");
    cat.save(&path).unwrap();
    let loaded = SubgroupCatalog::load(&path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), json);
    assert_eq!(loaded.to_json().unwrap(), json);

    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["level"], 3);
    let first = &v["classes"][0];
    for key in [
        "id",
        "order",
        "index",
        "generators",
        "parents",
        "density",
        "exemplar",
    ] {
        assert!(!first[key].is_null(), "missing {key}");
    }
    assert_eq!(first["density"]["num"], 5);
    assert_eq!(first["density"]["den"], 21);
    assert_eq!(first["generators"][0].as_array().unwrap().len(), 9);

    let dot = cat.to_dot();
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("n1 [label=\"1 (5/21)\"]"));
    assert_eq!(dot.matches("n1 -> ").count(), 16);
    assert_eq!(dot.matches("[label=").count(), 63);
}
