//! Prenex normal form for the EX fragment on tree models.
//!
//! The rewriting pulls quantifiers outwards with the tautologies
//! `EX Q p ψ ↔ Q p EX ψ`, `(Q p ψ) ∧ ψ' ↔ Q p (ψ ∧ ψ')` (and the `∨`
//! analogue), `¬∃p ψ ↔ ∀p ¬ψ` and `¬∀p ψ ↔ ∃p ¬ψ`, renaming a bound
//! variable whenever a sibling conjunct mentions it. The `EX` commutation is
//! sound on tree models only, which is why non-EX temporal operators are
//! rejected.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::syntax::{FragmentId, Formula, PropName};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PnfError {
    #[error("prenex normal form is defined for the EX fragment only, got an {0} formula")]
    NotExFragment(FragmentId),
}

/// A formula in prenex shape: quantifier prefix, then a quantifier-free
/// matrix.
struct Prenex {
    /// (is_exists, name) from outermost inwards.
    prefix: Vec<(bool, PropName)>,
    matrix: Formula,
}

impl Prenex {
    fn into_formula(self) -> Formula {
        let mut f = self.matrix;
        for (exists, p) in self.prefix.into_iter().rev() {
            f = if exists {
                Formula::Exists(p, Arc::new(f))
            } else {
                Formula::Forall(p, Arc::new(f))
            };
        }
        f
    }
}

/// True when the formula is a quantifier prefix over a quantifier-free body.
pub fn is_prenex(f: &Formula) -> bool {
    fn quantifier_free(f: &Formula) -> bool {
        use Formula::*;
        match f {
            True | False | Prop(_) => true,
            Exists(..) | Forall(..) => false,
            Not(g) | EX(g) | AX(g) | EF(g) | AG(g) | AF(g) | EXEF(g) | AXAG(g) => {
                quantifier_free(g)
            }
            And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) | EU(a, b) | AU(a, b) => {
                quantifier_free(a) && quantifier_free(b)
            }
        }
    }
    match f {
        Formula::Exists(_, g) | Formula::Forall(_, g) => is_prenex(g),
        other => quantifier_free(other),
    }
}

/// Number of leading quantifiers of a prenex formula.
pub fn prefix_len(f: &Formula) -> usize {
    match f {
        Formula::Exists(_, g) | Formula::Forall(_, g) => 1 + prefix_len(g),
        _ => 0,
    }
}

/// Renames free occurrences of `from` to `to`, stopping at shadowing
/// binders.
fn rename_free(f: &Formula, from: &PropName, to: &PropName) -> Formula {
    use Formula::*;
    match f {
        True => True,
        False => False,
        Prop(p) => Prop(if p == from { to.clone() } else { p.clone() }),
        Not(g) => Not(Arc::new(rename_free(g, from, to))),
        And(a, b) => And(
            Arc::new(rename_free(a, from, to)),
            Arc::new(rename_free(b, from, to)),
        ),
        Or(a, b) => Or(
            Arc::new(rename_free(a, from, to)),
            Arc::new(rename_free(b, from, to)),
        ),
        Implies(a, b) => Implies(
            Arc::new(rename_free(a, from, to)),
            Arc::new(rename_free(b, from, to)),
        ),
        Iff(a, b) => Iff(
            Arc::new(rename_free(a, from, to)),
            Arc::new(rename_free(b, from, to)),
        ),
        EX(g) => EX(Arc::new(rename_free(g, from, to))),
        AX(g) => AX(Arc::new(rename_free(g, from, to))),
        EF(g) => EF(Arc::new(rename_free(g, from, to))),
        AG(g) => AG(Arc::new(rename_free(g, from, to))),
        AF(g) => AF(Arc::new(rename_free(g, from, to))),
        EXEF(g) => EXEF(Arc::new(rename_free(g, from, to))),
        AXAG(g) => AXAG(Arc::new(rename_free(g, from, to))),
        EU(a, b) => EU(
            Arc::new(rename_free(a, from, to)),
            Arc::new(rename_free(b, from, to)),
        ),
        AU(a, b) => AU(
            Arc::new(rename_free(a, from, to)),
            Arc::new(rename_free(b, from, to)),
        ),
        Exists(p, g) if p == from => Exists(p.clone(), g.clone()),
        Forall(p, g) if p == from => Forall(p.clone(), g.clone()),
        Exists(p, g) => Exists(p.clone(), Arc::new(rename_free(g, from, to))),
        Forall(p, g) => Forall(p.clone(), Arc::new(rename_free(g, from, to))),
    }
}

struct NamePool {
    used: BTreeSet<PropName>,
}

impl NamePool {
    fn rename(&mut self, base: &PropName) -> PropName {
        let mut i = 1usize;
        loop {
            let candidate = PropName::new(format!("{}_{i}", base.as_str()));
            if self.used.insert(candidate.clone()) {
                return candidate;
            }
            i += 1;
        }
    }
}

/// Computes a logically equivalent prenex formula for an EX-fragment input.
/// The prefix never carries more quantifiers than the input had (`β ≤ |f|`
/// unless `<->` over a quantified subformula forces an expansion).
pub fn to_pnf(f: &Formula) -> Result<Formula, PnfError> {
    match f.fragment() {
        FragmentId::ExOnly => {}
        other => return Err(PnfError::NotExFragment(other)),
    }
    let mut pool = NamePool { used: f.all_props().into_iter().collect() };
    Ok(pnf(f, &mut pool).into_formula())
}

fn pnf(f: &Formula, pool: &mut NamePool) -> Prenex {
    use Formula::*;
    match f {
        True | False | Prop(_) => Prenex { prefix: Vec::new(), matrix: f.clone() },
        Not(g) => {
            let inner = pnf(g, pool);
            Prenex {
                prefix: inner.prefix.into_iter().map(|(e, p)| (!e, p)).collect(),
                matrix: Formula::Not(Arc::new(inner.matrix)),
            }
        }
        EX(g) => {
            let inner = pnf(g, pool);
            Prenex { prefix: inner.prefix, matrix: Formula::EX(Arc::new(inner.matrix)) }
        }
        AX(g) => {
            // AX = ¬EX¬: prefix flips twice, so it passes through unchanged.
            let inner = pnf(g, pool);
            Prenex { prefix: inner.prefix, matrix: Formula::AX(Arc::new(inner.matrix)) }
        }
        Exists(p, g) => {
            let inner = pnf(g, pool);
            let mut prefix = vec![(true, p.clone())];
            prefix.extend(inner.prefix);
            Prenex { prefix, matrix: inner.matrix }
        }
        Forall(p, g) => {
            let inner = pnf(g, pool);
            let mut prefix = vec![(false, p.clone())];
            prefix.extend(inner.prefix);
            Prenex { prefix, matrix: inner.matrix }
        }
        And(a, b) => merge(a, b, pool, |x, y| Formula::And(Arc::new(x), Arc::new(y))),
        Or(a, b) => merge(a, b, pool, |x, y| Formula::Or(Arc::new(x), Arc::new(y))),
        Implies(a, b) => pnf(&Formula::Or(Arc::new(Formula::Not(a.clone())), b.clone()), pool),
        Iff(a, b) => {
            // a <-> b expands to (a -> b) & (b -> a); quantified subformulas
            // are duplicated, so the prefix may grow beyond the input count.
            let fwd = Formula::Implies(a.clone(), b.clone());
            let bwd = Formula::Implies(b.clone(), a.clone());
            pnf(&Formula::And(Arc::new(fwd), Arc::new(bwd)), pool)
        }
        EF(_) | AG(_) | AF(_) | EXEF(_) | AXAG(_) | EU(..) | AU(..) => {
            unreachable!("rejected by the fragment precondition")
        }
    }
}

/// Merges the prenex forms of two sides of `∧`/`∨`, renaming prefix
/// variables that leak into the other side.
fn merge(a: &Formula, b: &Formula, pool: &mut NamePool, op: fn(Formula, Formula) -> Formula) -> Prenex {
    let pa = pnf(a, pool);
    let pb = pnf(b, pool);
    // Names the left prefix must avoid: anything in the right side, plus the
    // right prefix itself; symmetrically for the right prefix.
    let right_mentions: BTreeSet<PropName> = pb
        .matrix
        .all_props()
        .into_iter()
        .chain(pb.prefix.iter().map(|(_, p)| p.clone()))
        .collect();
    let mut left_prefix = pa.prefix;
    let mut left_matrix = pa.matrix;
    for entry in left_prefix.iter_mut() {
        if right_mentions.contains(&entry.1) {
            let fresh = pool.rename(&entry.1);
            left_matrix = rename_free(&left_matrix, &entry.1, &fresh);
            entry.1 = fresh;
        }
    }
    let left_mentions: BTreeSet<PropName> = left_matrix
        .all_props()
        .into_iter()
        .chain(left_prefix.iter().map(|(_, p)| p.clone()))
        .collect();
    let mut right_prefix = pb.prefix;
    let mut right_matrix = pb.matrix;
    for entry in right_prefix.iter_mut() {
        if left_mentions.contains(&entry.1) {
            let fresh = pool.rename(&entry.1);
            right_matrix = rename_free(&right_matrix, &entry.1, &fresh);
            entry.1 = fresh;
        }
    }
    let mut prefix = left_prefix;
    prefix.extend(right_prefix);
    Prenex { prefix, matrix: op(left_matrix, right_matrix) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn pnf_text(s: &str) -> String {
        to_pnf(&parse(s).unwrap()).unwrap().render()
    }

    #[test]
    fn commutes_ex_with_quantifier() {
        assert_eq!(pnf_text("EX exists p. p"), "exists p. EX p");
    }

    #[test]
    fn negation_flips_quantifier() {
        assert_eq!(pnf_text("~forall p. EX p"), "exists p. ~EX p");
    }

    #[test]
    fn already_prenex_unchanged() {
        assert_eq!(pnf_text("exists p. EX p"), "exists p. EX p");
    }

    #[test]
    fn sibling_conjunct_forces_rename() {
        let out = to_pnf(&parse("(exists p. EX p) & p").unwrap()).unwrap();
        assert!(is_prenex(&out));
        // the free p on the right must not be captured
        let rendered = out.render();
        assert!(rendered.starts_with("exists p_1."), "got: {rendered}");
        assert!(rendered.ends_with("& p)"), "got: {rendered}");
    }

    #[test]
    fn rejects_non_ex_fragment() {
        assert_eq!(
            to_pnf(&parse("EF exists p. p").unwrap()),
            Err(PnfError::NotExFragment(FragmentId::EfOnly)),
        );
    }

    #[test]
    fn prefix_not_longer_than_input() {
        for text in [
            "EX exists p. (p & forall q. (q | EX p))",
            "~exists p. (EX p & exists q. AX (p -> q))",
            "(exists p. EX p) & (exists p. AX p)",
        ] {
            let f = parse(text).unwrap();
            let out = to_pnf(&f).unwrap();
            assert!(is_prenex(&out));
            assert!(prefix_len(&out) <= f.length());
        }
    }
}
