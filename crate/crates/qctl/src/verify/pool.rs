//! Seeded random EX-fragment formulas for the property suites.

use rand::Rng;

use crate::syntax::{and, ax, ex, exists, forall, implies, not, or, prop, Formula};

/// Draws a random EX-fragment formula with modal depth at most `max_md`, at
/// most `max_quant` quantifiers, and free propositions from `free`.
/// Propositional atoms come from the free pool plus any quantified name
/// currently in scope.
pub fn random_ex_formula<R: Rng>(
    rng: &mut R,
    max_md: usize,
    max_quant: usize,
    free: &[&str],
) -> Formula {
    let mut scope: Vec<String> = Vec::new();
    let quant_pool = ["p", "q"];
    gen(rng, max_md, max_quant, 4, free, &quant_pool, &mut scope)
}

fn gen<R: Rng>(
    rng: &mut R,
    md: usize,
    quant: usize,
    size: usize,
    free: &[&str],
    quant_pool: &[&str],
    scope: &mut Vec<String>,
) -> Formula {
    let atom = |rng: &mut R, scope: &[String]| {
        let total = free.len() + scope.len();
        let pick = rng.gen_range(0..total);
        if pick < free.len() {
            prop(free[pick])
        } else {
            prop(scope[pick - free.len()].clone())
        }
    };
    if size == 0 {
        return atom(rng, scope);
    }
    // weights: atoms stay likely so formulas remain short
    let choice = rng.gen_range(0..10);
    match choice {
        0 | 1 => atom(rng, scope),
        2 => not(gen(rng, md, quant, size - 1, free, quant_pool, scope)),
        3 => and(
            gen(rng, md, quant, size - 1, free, quant_pool, scope),
            gen(rng, md, quant, size - 1, free, quant_pool, scope),
        ),
        4 => or(
            gen(rng, md, quant, size - 1, free, quant_pool, scope),
            gen(rng, md, quant, size - 1, free, quant_pool, scope),
        ),
        5 => implies(
            gen(rng, md, quant, size - 1, free, quant_pool, scope),
            gen(rng, md, quant, size - 1, free, quant_pool, scope),
        ),
        6 | 7 if md > 0 => {
            let inner = gen(rng, md - 1, quant, size - 1, free, quant_pool, scope);
            if choice == 6 {
                ex(inner)
            } else {
                ax(inner)
            }
        }
        8 | 9 if quant > 0 => {
            let name = quant_pool[rng.gen_range(0..quant_pool.len())].to_string();
            scope.push(name.clone());
            let inner = gen(rng, md, quant - 1, size - 1, free, quant_pool, scope);
            scope.pop();
            if choice == 8 {
                exists(name, inner)
            } else {
                forall(name, inner)
            }
        }
        _ => atom(rng, scope),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::FragmentId;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pool_respects_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let f = random_ex_formula(&mut rng, 2, 2, &["x", "y"]);
            assert!(f.modal_depth() <= 2);
            assert_eq!(f.fragment(), FragmentId::ExOnly);
            for p in f.free_props() {
                assert!(["x", "y"].contains(&p.as_str()), "leaked free prop {p}");
            }
        }
    }

    #[test]
    fn pool_is_deterministic() {
        let mut a = ChaCha8Rng::seed_from_u64(42);
        let mut b = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            assert_eq!(
                random_ex_formula(&mut a, 2, 2, &["x"]),
                random_ex_formula(&mut b, 2, 2, &["x"]),
            );
        }
    }
}
