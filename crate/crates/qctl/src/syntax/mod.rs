//! AST, concrete grammar, printer and structural metrics for QCTL formulas.
//!
//! The grammar (see [`parse`]):
//!
//! ```text
//! formula := quant | binary
//! quant   := ("exists" | "forall") prop "." formula
//! binary  := unary (("&" | "|" | "->" | "<->") unary)*   left-assoc,
//!            precedence ~ < & < | < -> < <->
//! unary   := "~" unary | "EX" unary | "AX" unary | "EF" unary | "AG" unary
//!          | "AF" unary | "EXEF" unary | "AXAG" unary
//!          | "E[" formula "U" formula "]" | "A[" formula "U" formula "]"
//!          | "true" | "false" | prop | "(" formula ")" | quant
//! ```

mod parse;

pub use parse::{parse, ParseError};

use std::fmt;
use std::sync::Arc;

/// A propositional variable name: a non-empty token over `[a-zA-Z0-9_]`.
///
/// Generators draw bound names from reserved families (`p<i>`, `q<i>`,
/// `x<i>`, `y<i>`, `w`, `w_`, `val`, `h<i>`, `v<i>`, `lft`, `sel`, `rgt`,
/// `layer<i>`/`layer_m1`, `in`, `t_<tile>_<j>`); user propositions are
/// expected to stay out of those families.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PropName(pub String);

impl PropName {
    pub fn new(name: impl Into<String>) -> Self {
        PropName(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PropName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for PropName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PropName({})", self.0)
    }
}

impl From<&str> for PropName {
    fn from(s: &str) -> Self {
        PropName(s.to_owned())
    }
}

/// A QCTL formula.
///
/// `EF`/`AG`/`AF`/`EXEF`/`AXAG` and `Forall` are first-class nodes;
/// [`Formula::desugar`] maps them to the core connectives. Subformulas are
/// shared via [`Arc`], so recursive schema generators can reuse instances
/// without copying.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Prop(PropName),
    Not(Arc<Formula>),
    And(Arc<Formula>, Arc<Formula>),
    Or(Arc<Formula>, Arc<Formula>),
    Implies(Arc<Formula>, Arc<Formula>),
    Iff(Arc<Formula>, Arc<Formula>),
    EX(Arc<Formula>),
    AX(Arc<Formula>),
    EU(Arc<Formula>, Arc<Formula>),
    AU(Arc<Formula>, Arc<Formula>),
    EF(Arc<Formula>),
    AG(Arc<Formula>),
    AF(Arc<Formula>),
    /// Strict "somewhere below": one step, then reflexive reachability.
    /// A single AST node, but it abbreviates two nested operators.
    EXEF(Arc<Formula>),
    /// Dual of [`Formula::EXEF`]: everywhere strictly below.
    AXAG(Arc<Formula>),
    Exists(PropName, Arc<Formula>),
    Forall(PropName, Arc<Formula>),
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Syntactic fragment of a formula, classified over its temporal operators
/// (duals count as members of their fragment).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FragmentId {
    ExOnly,
    EfOnly,
    ExefOnly,
    Full,
}

impl fmt::Display for FragmentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FragmentId::ExOnly => "EX",
            FragmentId::EfOnly => "EF",
            FragmentId::ExefOnly => "EXEF",
            FragmentId::Full => "full",
        };
        f.write_str(s)
    }
}

// Constructor helpers. Schema generators chain these heavily, so they accept
// anything convertible into an Arc'd formula.
pub fn prop(name: impl Into<String>) -> Formula {
    Formula::Prop(PropName::new(name))
}

pub fn not(f: impl Into<Arc<Formula>>) -> Formula {
    Formula::Not(f.into())
}

pub fn and(a: impl Into<Arc<Formula>>, b: impl Into<Arc<Formula>>) -> Formula {
    Formula::And(a.into(), b.into())
}

pub fn or(a: impl Into<Arc<Formula>>, b: impl Into<Arc<Formula>>) -> Formula {
    Formula::Or(a.into(), b.into())
}

pub fn implies(a: impl Into<Arc<Formula>>, b: impl Into<Arc<Formula>>) -> Formula {
    Formula::Implies(a.into(), b.into())
}

pub fn iff(a: impl Into<Arc<Formula>>, b: impl Into<Arc<Formula>>) -> Formula {
    Formula::Iff(a.into(), b.into())
}

pub fn ex(f: impl Into<Arc<Formula>>) -> Formula {
    Formula::EX(f.into())
}

pub fn ax(f: impl Into<Arc<Formula>>) -> Formula {
    Formula::AX(f.into())
}

pub fn ef(f: impl Into<Arc<Formula>>) -> Formula {
    Formula::EF(f.into())
}

pub fn ag(f: impl Into<Arc<Formula>>) -> Formula {
    Formula::AG(f.into())
}

pub fn af(f: impl Into<Arc<Formula>>) -> Formula {
    Formula::AF(f.into())
}

pub fn exef(f: impl Into<Arc<Formula>>) -> Formula {
    Formula::EXEF(f.into())
}

pub fn axag(f: impl Into<Arc<Formula>>) -> Formula {
    Formula::AXAG(f.into())
}

pub fn eu(a: impl Into<Arc<Formula>>, b: impl Into<Arc<Formula>>) -> Formula {
    Formula::EU(a.into(), b.into())
}

pub fn au(a: impl Into<Arc<Formula>>, b: impl Into<Arc<Formula>>) -> Formula {
    Formula::AU(a.into(), b.into())
}

pub fn exists(p: impl Into<String>, f: impl Into<Arc<Formula>>) -> Formula {
    Formula::Exists(PropName::new(p), f.into())
}

pub fn forall(p: impl Into<String>, f: impl Into<Arc<Formula>>) -> Formula {
    Formula::Forall(PropName::new(p), f.into())
}

/// Conjunction of a list; empty list is `true`.
pub fn conj(fs: impl IntoIterator<Item = Formula>) -> Formula {
    let mut it = fs.into_iter();
    match it.next() {
        None => Formula::True,
        Some(first) => it.fold(first, |acc, f| and(acc, f)),
    }
}

/// Disjunction of a list; empty list is `false`.
pub fn disj(fs: impl IntoIterator<Item = Formula>) -> Formula {
    let mut it = fs.into_iter();
    match it.next() {
        None => Formula::False,
        Some(first) => it.fold(first, |acc, f| or(acc, f)),
    }
}

/// `EX^k f`: k literal nestings of EX (no exponent node).
pub fn ex_pow(k: usize, f: Formula) -> Formula {
    (0..k).fold(f, |acc, _| ex(acc))
}

/// `AX^k f`.
pub fn ax_pow(k: usize, f: Formula) -> Formula {
    (0..k).fold(f, |acc, _| ax(acc))
}

impl Formula {
    /// Maximal number of nested temporal operators. `EXEF`/`AXAG` count 2
    /// (they abbreviate two nested operators); quantifiers and Boolean
    /// connectives count 0.
    pub fn modal_depth(&self) -> usize {
        use Formula::*;
        match self {
            True | False | Prop(_) => 0,
            Not(f) | Exists(_, f) | Forall(_, f) => f.modal_depth(),
            And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) => {
                a.modal_depth().max(b.modal_depth())
            }
            EX(f) | AX(f) | EF(f) | AG(f) | AF(f) => 1 + f.modal_depth(),
            EXEF(f) | AXAG(f) => 2 + f.modal_depth(),
            EU(a, b) | AU(a, b) => 1 + a.modal_depth().max(b.modal_depth()),
        }
    }

    /// Length as AST node count: each variable occurrence, connective,
    /// operator and quantifier is one symbol.
    pub fn length(&self) -> usize {
        use Formula::*;
        match self {
            True | False | Prop(_) => 1,
            Not(f) | EX(f) | AX(f) | EF(f) | AG(f) | AF(f) | EXEF(f) | AXAG(f) => 1 + f.length(),
            Exists(_, f) | Forall(_, f) => 1 + f.length(),
            And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) | EU(a, b) | AU(a, b) => {
                1 + a.length() + b.length()
            }
        }
    }

    /// Smallest fragment containing all temporal operators of the formula.
    /// A purely propositional formula classifies as [`FragmentId::ExOnly`].
    pub fn fragment(&self) -> FragmentId {
        #[derive(Default)]
        struct Seen {
            ex: bool,
            ef: bool,
            exef: bool,
            until: bool,
        }
        fn walk(f: &Formula, s: &mut Seen) {
            use Formula::*;
            match f {
                True | False | Prop(_) => {}
                Not(g) | Exists(_, g) | Forall(_, g) => walk(g, s),
                And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) => {
                    walk(a, s);
                    walk(b, s);
                }
                EX(g) | AX(g) => {
                    s.ex = true;
                    walk(g, s);
                }
                EF(g) | AG(g) => {
                    s.ef = true;
                    walk(g, s);
                }
                EXEF(g) | AXAG(g) => {
                    s.exef = true;
                    walk(g, s);
                }
                EU(a, b) | AU(a, b) => {
                    s.until = true;
                    walk(a, s);
                    walk(b, s);
                }
                AF(g) => {
                    s.until = true;
                    walk(g, s);
                }
            }
        }
        let mut s = Seen::default();
        walk(self, &mut s);
        match (s.ex, s.ef, s.exef, s.until) {
            (_, _, _, true) => FragmentId::Full,
            (true, false, false, _) => FragmentId::ExOnly,
            (false, true, false, _) => FragmentId::EfOnly,
            (false, false, true, _) => FragmentId::ExefOnly,
            (false, false, false, false) => FragmentId::ExOnly,
            _ => FragmentId::Full,
        }
    }

    /// Rewrites to the core connectives: `Prop`/`Not`/`And`/`EX`/`EU`/`AU`/
    /// `Exists` (plus the `true` constant).
    ///
    /// `EF φ ≝ E[⊤ U φ]`, `AG φ ≝ ¬EF ¬φ`, `AF φ ≝ A[⊤ U φ]`,
    /// `AX φ ≝ ¬EX ¬φ`, `∀p φ ≝ ¬∃p ¬φ`; `EXEF`/`AXAG` expand through the
    /// same definitions; `∨`/`→`/`↔` expand through De Morgan.
    pub fn desugar(&self) -> Formula {
        use Formula::*;
        match self {
            True => True,
            False => not(True),
            Prop(p) => Prop(p.clone()),
            Not(f) => not(f.desugar()),
            And(a, b) => and(a.desugar(), b.desugar()),
            Or(a, b) => not(and(not(a.desugar()), not(b.desugar()))),
            Implies(a, b) => not(and(a.desugar(), not(b.desugar()))),
            Iff(a, b) => {
                let (da, db) = (a.desugar(), b.desugar());
                and(
                    not(and(da.clone(), not(db.clone()))),
                    not(and(db, not(da))),
                )
            }
            EX(f) => ex(f.desugar()),
            AX(f) => not(ex(not(f.desugar()))),
            EU(a, b) => eu(a.desugar(), b.desugar()),
            AU(a, b) => au(a.desugar(), b.desugar()),
            EF(f) => eu(True, f.desugar()),
            AG(f) => not(eu(True, not(f.desugar()))),
            AF(f) => au(True, f.desugar()),
            EXEF(f) => ex(eu(True, f.desugar())),
            AXAG(f) => not(ex(eu(True, not(f.desugar())))),
            Exists(p, f) => Exists(p.clone(), Arc::new(f.desugar())),
            Forall(p, f) => not(Exists(p.clone(), Arc::new(not(f.desugar())))),
        }
    }

    /// Free propositional variables (not captured by a quantifier), in
    /// sorted order.
    pub fn free_props(&self) -> Vec<PropName> {
        use std::collections::BTreeSet;
        fn walk(f: &Formula, bound: &mut Vec<PropName>, acc: &mut BTreeSet<PropName>) {
            use Formula::*;
            match f {
                True | False => {}
                Prop(p) => {
                    if !bound.contains(p) {
                        acc.insert(p.clone());
                    }
                }
                Not(g) | EX(g) | AX(g) | EF(g) | AG(g) | AF(g) | EXEF(g) | AXAG(g) => {
                    walk(g, bound, acc)
                }
                And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) | EU(a, b) | AU(a, b) => {
                    walk(a, bound, acc);
                    walk(b, bound, acc);
                }
                Exists(p, g) | Forall(p, g) => {
                    bound.push(p.clone());
                    walk(g, bound, acc);
                    bound.pop();
                }
            }
        }
        let mut acc = BTreeSet::new();
        walk(self, &mut Vec::new(), &mut acc);
        acc.into_iter().collect()
    }

    /// All propositional variables occurring anywhere, bound or free.
    pub fn all_props(&self) -> Vec<PropName> {
        use std::collections::BTreeSet;
        fn walk(f: &Formula, acc: &mut BTreeSet<PropName>) {
            use Formula::*;
            match f {
                True | False => {}
                Prop(p) => {
                    acc.insert(p.clone());
                }
                Not(g) | EX(g) | AX(g) | EF(g) | AG(g) | AF(g) | EXEF(g) | AXAG(g) => walk(g, acc),
                And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) | EU(a, b) | AU(a, b) => {
                    walk(a, acc);
                    walk(b, acc);
                }
                Exists(p, g) | Forall(p, g) => {
                    acc.insert(p.clone());
                    walk(g, acc);
                }
            }
        }
        let mut acc = BTreeSet::new();
        walk(self, &mut acc);
        acc.into_iter().collect()
    }

    /// Renders to the concrete syntax. The output re-parses to a
    /// structurally equal AST.
    pub fn render(&self) -> String {
        let mut out = String::new();
        render_prec(self, 0, &mut out);
        out
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

// Binding strength: <-> 1, -> 2, | 3, & 4, unary 5.
fn render_prec(f: &Formula, prec: u8, out: &mut String) {
    use Formula::*;
    let level = match f {
        Iff(..) => 1,
        Implies(..) => 2,
        Or(..) => 3,
        And(..) => 4,
        _ => 5,
    };
    let parens = level < prec;
    if parens {
        out.push('(');
    }
    match f {
        True => out.push_str("true"),
        False => out.push_str("false"),
        Prop(p) => out.push_str(p.as_str()),
        Not(g) => {
            out.push('~');
            render_prec(g, 5, out);
        }
        And(a, b) => {
            render_prec(a, 4, out);
            out.push_str(" & ");
            render_prec(b, 5, out);
        }
        Or(a, b) => {
            render_prec(a, 3, out);
            out.push_str(" | ");
            render_prec(b, 4, out);
        }
        Implies(a, b) => {
            render_prec(a, 2, out);
            out.push_str(" -> ");
            render_prec(b, 3, out);
        }
        Iff(a, b) => {
            render_prec(a, 1, out);
            out.push_str(" <-> ");
            render_prec(b, 2, out);
        }
        EX(g) => render_unary("EX", g, out),
        AX(g) => render_unary("AX", g, out),
        EF(g) => render_unary("EF", g, out),
        AG(g) => render_unary("AG", g, out),
        AF(g) => render_unary("AF", g, out),
        EXEF(g) => render_unary("EXEF", g, out),
        AXAG(g) => render_unary("AXAG", g, out),
        EU(a, b) => {
            out.push_str("E[ ");
            render_prec(a, 0, out);
            out.push_str(" U ");
            render_prec(b, 0, out);
            out.push_str(" ]");
        }
        AU(a, b) => {
            out.push_str("A[ ");
            render_prec(a, 0, out);
            out.push_str(" U ");
            render_prec(b, 0, out);
            out.push_str(" ]");
        }
        Exists(p, g) => render_quant("exists", p, g, out),
        Forall(p, g) => render_quant("forall", p, g, out),
    }
    if parens {
        out.push(')');
    }
}

fn render_unary(op: &str, g: &Formula, out: &mut String) {
    out.push_str(op);
    out.push(' ');
    render_prec(g, 5, out);
}

// Quantifier bodies that are binary connectives get explicit parentheses so
// quantifier scope stays visible in long schema renderings.
fn render_quant(q: &str, p: &PropName, g: &Formula, out: &mut String) {
    use Formula::*;
    out.push_str(q);
    out.push(' ');
    out.push_str(p.as_str());
    out.push_str(". ");
    match g {
        And(..) | Or(..) | Implies(..) | Iff(..) => {
            out.push('(');
            render_prec(g, 0, out);
            out.push(')');
        }
        _ => render_prec(g, 0, out),
    }
}

/// Deterministic source of fresh propositional names from the reserved
/// families. Generators thread one of these; the CLI seeds it with `--seed`.
#[derive(Debug, Clone)]
pub struct FreshNames {
    next: u64,
}

impl Default for FreshNames {
    fn default() -> Self {
        FreshNames { next: 0 }
    }
}

impl FreshNames {
    pub fn starting_at(seed: u64) -> Self {
        FreshNames { next: seed }
    }

    /// Next name in the family `<prefix><i>`.
    pub fn fresh(&mut self, prefix: &str) -> PropName {
        let name = PropName::new(format!("{prefix}{}", self.next));
        self.next += 1;
        name
    }

    /// Next `<prefix><i>` distinct from every name in `avoid`.
    pub fn fresh_avoiding(&mut self, prefix: &str, avoid: &[&PropName]) -> PropName {
        loop {
            let candidate = self.fresh(prefix);
            if !avoid.iter().any(|a| **a == candidate) {
                return candidate;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        prop(s)
    }

    #[test]
    fn parse_single_operator() {
        assert_eq!(parse("EX p").unwrap(), ex(p("p")));
    }

    #[test]
    fn parse_quantifier_scope() {
        assert_eq!(
            parse("exists p. EX (x & p)").unwrap(),
            exists("p", ex(and(p("x"), p("p")))),
        );
    }

    #[test]
    fn parse_until() {
        assert_eq!(parse("E[ p U q ]").unwrap(), eu(p("p"), p("q")));
        assert_eq!(parse("A[p U q]").unwrap(), au(p("p"), p("q")));
    }

    #[test]
    fn parse_quantifier_after_unary() {
        assert_eq!(parse("EX exists p. p").unwrap(), ex(exists("p", p("p"))));
        assert_eq!(
            parse("~forall p. EX p").unwrap(),
            not(forall("p", ex(p("p")))),
        );
    }

    #[test]
    fn parse_precedence() {
        // ~ < & < | < -> < <->
        assert_eq!(
            parse("a & b | c").unwrap(),
            or(and(p("a"), p("b")), p("c")),
        );
        assert_eq!(
            parse("a -> b <-> c").unwrap(),
            iff(implies(p("a"), p("b")), p("c")),
        );
        assert_eq!(parse("~a & b").unwrap(), and(not(p("a")), p("b")));
        // left associativity
        assert_eq!(
            parse("a -> b -> c").unwrap(),
            implies(implies(p("a"), p("b")), p("c")),
        );
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = parse("EX (p &").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("expected"), "got: {msg}");
    }

    #[test]
    fn render_examples() {
        assert_eq!(ex(p("p")).render(), "EX p");
        assert_eq!(
            exists("p", and(p("p"), not(p("p")))).render(),
            "exists p. (p & ~p)",
        );
        assert_eq!(eu(Formula::True, p("q")).render(), "E[ true U q ]");
    }

    #[test]
    fn modal_depth_examples() {
        assert_eq!(p("p").modal_depth(), 0);
        assert_eq!(ex(ex(p("p"))).modal_depth(), 2);
        assert_eq!(
            exists("p", eu(p("p"), ex(p("q")))).modal_depth(),
            2,
        );
        assert_eq!(exef(p("p")).modal_depth(), 2);
    }

    #[test]
    fn length_examples() {
        assert_eq!(p("p").length(), 1);
        assert_eq!(not(and(p("p"), p("q"))).length(), 4);
        assert_eq!(ex(p("p")).length(), 2);
    }

    #[test]
    fn fragment_examples() {
        assert_eq!(and(ex(p("p")), ax(p("q"))).fragment(), FragmentId::ExOnly);
        assert_eq!(ef(p("p")).fragment(), FragmentId::EfOnly);
        assert_eq!(and(ex(p("p")), ef(p("q"))).fragment(), FragmentId::Full);
        assert_eq!(axag(p("p")).fragment(), FragmentId::ExefOnly);
        assert_eq!(p("p").fragment(), FragmentId::ExOnly);
        assert_eq!(af(p("p")).fragment(), FragmentId::Full);
    }

    #[test]
    fn desugar_examples() {
        assert_eq!(ef(p("p")).desugar(), eu(Formula::True, p("p")));
        assert_eq!(ax(p("p")).desugar(), not(ex(not(p("p")))));
        assert_eq!(p("p").desugar(), p("p"));
        assert_eq!(
            forall("q", p("q")).desugar(),
            not(exists("q", not(p("q")))),
        );
    }

    #[test]
    fn desugar_stays_in_core() {
        fn core_only(f: &Formula) -> bool {
            use Formula::*;
            match f {
                True | Prop(_) => true,
                Not(g) | EX(g) => core_only(g),
                And(a, b) | EU(a, b) | AU(a, b) => core_only(a) && core_only(b),
                Exists(_, g) => core_only(g),
                _ => false,
            }
        }
        let f = parse("forall p. (EF p <-> AG (p | false)) & AXAG EXEF AF p").unwrap();
        assert!(core_only(&f.desugar()));
    }

    #[test]
    fn free_props_respects_binders() {
        let f = parse("exists p. (p & q) | p").unwrap();
        // The trailing `p` is inside the quantifier body (maximal scope).
        assert_eq!(f.free_props(), vec![PropName::new("q")]);
    }

    #[test]
    fn fresh_names_avoid() {
        let mut fresh = FreshNames::default();
        let q0 = PropName::new("q0");
        let got = fresh.fresh_avoiding("q", &[&q0]);
        assert_eq!(got, PropName::new("q1"));
    }
}
