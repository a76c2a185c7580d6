//! Generators for the formula schema catalogue: the local-nominal toolkit,
//! graded counting, grid encodings, the alternating multi-tiling reduction,
//! tower-counting node types, arithmetic comparison families,
//! lsr-partitions, and the grid tiling reduction — plus the canonical
//! witness trees the positive tests evaluate them on.
//!
//! Every schema draws bound names from a per-call [`FreshNames`] counter
//! with reserved prefixes, so generators are deterministic given the
//! counter seed. Nested schemas reuse the names `lft`/`sel`/`rgt` and
//! `w`/`w_` freely; evaluation uses innermost binding, so shadowing is
//! harmless exactly as in the source constructions.

use std::collections::BTreeSet;

use crate::syntax::{
    and, ax, conj, disj, ex, ex_pow, exists, forall, iff, implies, not, or, prop, Formula,
    FreshNames, PropName,
};
use crate::tiling::{AmtpInstance, Tile, TilingInstance};
use crate::trees::{tetration_capped, NodeId, TreeModel, DEFAULT_TETRATION_CAP};

/// An ordered list of nominal names `x_1, …, x_d`; possibly empty (the
/// at-operator on the empty path is the identity).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NominalPath(pub Vec<PropName>);

impl NominalPath {
    pub fn empty() -> Self {
        NominalPath(Vec::new())
    }

    pub fn single(x: impl Into<String>) -> Self {
        NominalPath(vec![PropName::new(x)])
    }

    pub fn of(names: &[&str]) -> Self {
        NominalPath(names.iter().map(|n| PropName::new(*n)).collect())
    }

    pub fn push(&self, x: PropName) -> Self {
        let mut v = self.0.clone();
        v.push(x);
        NominalPath(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SchemaError {
    #[error("nominal names must be pairwise distinct, `{0}` repeats")]
    DuplicateName(String),
    #[error("nominal paths must have equal length {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("comparison needs 1 ≤ d ≤ k, got d={d}, k={k}")]
    BadDepth { d: usize, k: usize },
    #[error("lsr-partition needs d < k, got d={d}, k={k}")]
    BadLsrDepth { d: usize, k: usize },
    #[error("schema parameter out of range: {0}")]
    BadParameter(&'static str),
    #[error("schema size cap exceeded for k={k}: raise the cap to generate towers past height {max}")]
    SizeCap { k: usize, max: usize },
    #[error("tetration cap exceeded building the canonical tree for k={k}, n={n}")]
    TreeCap { k: usize, n: usize },
}

/// Height cap for the mutually recursive tower schemas; their sizes grow as
/// `2^O(k+n)`.
pub const MAX_TOWER_HEIGHT: usize = 6;

fn p_bit(i: usize) -> Formula {
    prop(format!("p{i}"))
}

fn val() -> Formula {
    prop("val")
}

fn h_bit(i: usize) -> Formula {
    prop(format!("h{i}"))
}

fn v_bit(i: usize) -> Formula {
    prop(format!("v{i}"))
}

fn lft() -> PropName {
    PropName::new("lft")
}

fn sel() -> PropName {
    PropName::new("sel")
}

fn rgt() -> PropName {
    PropName::new("rgt")
}

/// Proposition standing for a tile in the grid reduction.
pub fn tile_prop(t: &Tile) -> PropName {
    PropName::new(format!("t_{t}"))
}

/// Proposition standing for a tile at stacking level `j` in the AMTP
/// reduction.
pub fn tile_prop_level(t: &Tile, j: usize) -> PropName {
    PropName::new(format!("t_{t}_{j}"))
}

/// `@_x^k f = EX^k (x ∧ f)`.
pub fn at_depth(x: &PropName, k: usize, f: Formula) -> Formula {
    ex_pow(k, and(Formula::Prop(x.clone()), f))
}

/// `@_{x_1} @_{x_2} … @_{x_d} f`, each step one `EX(x_i ∧ ·)`; identity on
/// the empty path.
pub fn at(path: &NominalPath, f: Formula) -> Formula {
    path.0
        .iter()
        .rev()
        .fold(f, |acc, x| ex(and(Formula::Prop(x.clone()), acc)))
}

/// `bind(x, k)`: `x` is a nominal for depth `k` — it holds at exactly one
/// node `k` steps below the evaluation node.
///
/// Schema: `EX^k x ∧ ¬∃p (EX^k(x ∧ p) ∧ EX^k(x ∧ ¬p))` with `p` fresh.
pub fn bind(x: &PropName, k: usize, fresh: &mut FreshNames) -> Formula {
    let p = fresh.fresh_avoiding("q", &[x]);
    let name = p.0.clone();
    let xf = Formula::Prop(x.clone());
    and(
        ex_pow(k, xf.clone()),
        not(exists(
            name,
            and(
                ex_pow(k, and(xf.clone(), Formula::Prop(p.clone()))),
                ex_pow(k, and(xf, not(Formula::Prop(p)))),
            ),
        )),
    )
}

/// `distinct-bind(x_1, …, x_α, k)`: each `x_i` is a depth-`k` nominal and no
/// two name the same node.
pub fn distinct_bind(xs: &[PropName], k: usize, fresh: &mut FreshNames) -> Result<Formula, SchemaError> {
    for (i, x) in xs.iter().enumerate() {
        if xs[i + 1..].contains(x) {
            return Err(SchemaError::DuplicateName(x.0.clone()));
        }
    }
    let binds = conj(xs.iter().map(|x| bind(x, k, fresh)));
    let mut apart = Vec::new();
    for j in 0..xs.len() {
        for i in 0..j {
            apart.push(not(at_depth(&xs[i], k, Formula::Prop(xs[j].clone()))));
        }
    }
    Ok(if apart.is_empty() { binds } else { and(binds, conj(apart)) })
}

/// `Uni(X)`: no pair of distinct children agrees on every proposition in
/// `X`.
pub fn uni(x_set: &[PropName], fresh: &mut FreshNames) -> Formula {
    let avoid: Vec<&PropName> = x_set.iter().collect();
    let x = fresh.fresh_avoiding("x", &avoid);
    let y = fresh.fresh_avoiding("y", &avoid);
    let agreement = conj(x_set.iter().map(|p| {
        iff(
            at_depth(&x, 1, Formula::Prop(p.clone())),
            at_depth(&y, 1, Formula::Prop(p.clone())),
        )
    }));
    let body = implies(
        distinct_bind(&[x.clone(), y.clone()], 1, fresh).expect("fresh names distinct"),
        not(agreement),
    );
    forall(x.as_str(), forall(y.as_str(), body))
}

/// Child-counting schema selector.
#[derive(Debug, Clone)]
pub enum CountSpec {
    /// Exactly `i` children satisfy the body.
    Exactly(usize, Formula),
    /// At most `2^n` children, via `∃ p_0 … p_{n−1} Uni({p_0, …, p_{n−1}})`.
    AtMostPow2(usize),
}

/// Graded counting: `EX_{=0} ψ = AX ¬ψ`; `EX_{=1} ψ` goes through the
/// unique-successor schema; `EX_{=i} ψ` for `i ≥ 2` names `i` pairwise
/// distinct children and forces them to exhaust ψ.
pub fn count_children(spec: &CountSpec, fresh: &mut FreshNames) -> Formula {
    match spec {
        CountSpec::Exactly(0, body) => ax(not(body.clone())),
        CountSpec::Exactly(1, body) => {
            let p = fresh.fresh("q");
            let name = p.0.clone();
            and(
                ex(body.clone()),
                not(exists(
                    name,
                    and(
                        ex(and(body.clone(), Formula::Prop(p.clone()))),
                        ex(and(body.clone(), not(Formula::Prop(p)))),
                    ),
                )),
            )
        }
        CountSpec::Exactly(i, body) => {
            let qs: Vec<PropName> = (0..*i).map(|_| fresh.fresh("q")).collect();
            let names = disj(qs.iter().map(|q| Formula::Prop(q.clone())));
            let cover = if *body == Formula::True {
                ax(names)
            } else {
                ax(iff(names, body.clone()))
            };
            let mut f = and(
                distinct_bind(&qs, 1, fresh).expect("fresh names distinct"),
                cover,
            );
            for q in qs.iter().rev() {
                f = exists(q.as_str(), f);
            }
            f
        }
        CountSpec::AtMostPow2(n) => {
            let ps: Vec<PropName> = (0..*n).map(|i| PropName::new(format!("p{i}"))).collect();
            let mut f = uni(&ps, fresh);
            for p in ps.iter().rev() {
                f = exists(p.as_str(), f);
            }
            f
        }
    }
}

/// `grid(2n)`: the depth-`2n` full binary unfolding whose `2^{2n}` frontier
/// nodes carry pairwise distinct `h`/`v` coordinate bits.
pub fn grid(n: usize, fresh: &mut FreshNames) -> Formula {
    let two_children = count_children(&CountSpec::Exactly(2, Formula::True), fresh);
    let upper = conj((0..2 * n).map(|i| crate::syntax::ax_pow(i, two_children.clone())));
    let x = fresh.fresh("x");
    let y = fresh.fresh("y");
    let differ = disj((0..n).map(|j| {
        or(
            not(iff(
                at_depth(&x, 2 * n, h_bit(j)),
                at_depth(&y, 2 * n, h_bit(j)),
            )),
            not(iff(
                at_depth(&x, 2 * n, v_bit(j)),
                at_depth(&y, 2 * n, v_bit(j)),
            )),
        )
    }));
    let lower = forall(
        x.as_str(),
        forall(
            y.as_str(),
            implies(
                distinct_bind(&[x.clone(), y.clone()], 2 * n, fresh).expect("distinct"),
                differ,
            ),
        ),
    );
    and(upper, lower)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Horizontal,
    Vertical,
}

/// `HN(x, y)` / `VN(x, y)`: the depth-`2n` nodes named by `x` and `y`
/// encode grid positions that are horizontal (resp. vertical) neighbours —
/// the moving axis increments by one, the other axis agrees.
pub fn neighbor(x: &PropName, y: &PropName, n: usize, axis: Axis) -> Formula {
    let depth = 2 * n;
    let (fixed, moving): (fn(usize) -> Formula, fn(usize) -> Formula) = match axis {
        Axis::Horizontal => (v_bit, h_bit),
        Axis::Vertical => (h_bit, v_bit),
    };
    let agree = conj((0..n).map(|a| {
        iff(at_depth(x, depth, fixed(a)), at_depth(y, depth, fixed(a)))
    }));
    let increment = disj((0..n).map(|i| {
        let mut parts = vec![
            at_depth(x, depth, not(moving(i))),
            at_depth(y, depth, moving(i)),
        ];
        for a in 0..i {
            parts.push(at_depth(x, depth, moving(a)));
            parts.push(at_depth(y, depth, not(moving(a))));
        }
        for a in i + 1..n {
            parts.push(iff(at_depth(x, depth, moving(a)), at_depth(y, depth, moving(a))));
        }
        conj(parts)
    }));
    and(agree, increment)
}

/// The per-level formulas of the alternating multi-tiling reduction, all
/// over the level-`j` tile propositions.
#[derive(Debug, Clone)]
pub struct AmtpComponents {
    /// Every grid position carries exactly one level-`j` tile.
    pub cov: Formula,
    /// Horizontal matching between neighbouring positions.
    pub hori: Formula,
    /// Vertical matching.
    pub verti: Formula,
    /// Exactly one initial tile on each position of the first row.
    pub init: Formula,
    /// Some position of the last row carries an accepting tile.
    pub acc: Formula,
    /// Levels `j` and `j+1` agree pointwise up to the multi relation.
    pub multi: Formula,
}

fn first_row(x: &PropName, n: usize) -> Formula {
    at_depth(x, 2 * n, conj((0..n).map(|a| not(h_bit(a)))))
}

fn exactly_one_of(props: Vec<PropName>) -> Formula {
    let some = disj(props.iter().map(|t| Formula::Prop(t.clone())));
    let mut pairs = Vec::new();
    for j in 0..props.len() {
        for i in 0..j {
            pairs.push(not(and(
                Formula::Prop(props[i].clone()),
                Formula::Prop(props[j].clone()),
            )));
        }
    }
    if pairs.is_empty() {
        some
    } else {
        and(some, conj(pairs))
    }
}

/// Generates `{cov, hori, verti, init, acc, multi}` for stacking level `j`.
pub fn amtp_components(inst: &AmtpInstance, j: usize, fresh: &mut FreshNames) -> AmtpComponents {
    let n = inst.n;
    let depth = 2 * n;
    let tiles_at = |tiles: &[Tile], level: usize| -> Vec<PropName> {
        tiles.iter().map(|t| tile_prop_level(t, level)).collect()
    };
    let all: Vec<Tile> = inst.tiles.clone();
    let t0: Vec<Tile> = inst.t0.iter().cloned().collect();
    let acc_tiles: Vec<Tile> = inst.acc.iter().cloned().collect();

    let cov = {
        let x = fresh.fresh("x");
        forall(
            x.as_str(),
            implies(
                bind(&x, depth, fresh),
                at_depth(&x, depth, exactly_one_of(tiles_at(&all, j))),
            ),
        )
    };

    let matching = |relation: &BTreeSet<(Tile, Tile)>, axis: Axis, fresh: &mut FreshNames| {
        let x = fresh.fresh("x");
        let y = fresh.fresh("y");
        let hit = disj(relation.iter().map(|(t, u)| {
            and(
                at_depth(&x, depth, Formula::Prop(tile_prop_level(t, j))),
                at_depth(&y, depth, Formula::Prop(tile_prop_level(u, j))),
            )
        }));
        let antecedent = conj([
            bind(&x, depth, fresh),
            bind(&y, depth, fresh),
            neighbor(&x, &y, n, axis),
        ]);
        forall(x.as_str(), forall(y.as_str(), implies(antecedent, hit)))
    };
    let hori = matching(&inst.hori, Axis::Horizontal, fresh);
    let verti = matching(&inst.verti, Axis::Vertical, fresh);

    let init = {
        let x = fresh.fresh("x");
        forall(
            x.as_str(),
            implies(
                and(bind(&x, depth, fresh), first_row(&x, n)),
                at_depth(&x, depth, exactly_one_of(tiles_at(&t0, j))),
            ),
        )
    };

    let acc = {
        let x = fresh.fresh("x");
        let last_row = conj((0..n).map(h_bit));
        let hit = disj(
            acc_tiles
                .iter()
                .map(|t| Formula::Prop(tile_prop_level(t, j))),
        );
        exists(
            x.as_str(),
            and(bind(&x, depth, fresh), at_depth(&x, depth, and(last_row, hit))),
        )
    };

    let multi = {
        let x = fresh.fresh("x");
        let hit = disj(inst.multi.iter().map(|(t, u)| {
            and(
                Formula::Prop(tile_prop_level(t, j)),
                Formula::Prop(tile_prop_level(u, j + 1)),
            )
        }));
        forall(
            x.as_str(),
            implies(bind(&x, depth, fresh), at_depth(&x, depth, hit)),
        )
    };

    AmtpComponents { cov, hori, verti, init, acc, multi }
}

/// For each first-row position, the level-`j` tile coincides with the
/// level-`j'` tile.
pub fn amtp_coinci(inst: &AmtpInstance, j: usize, j_prime: usize, fresh: &mut FreshNames) -> Formula {
    let n = inst.n;
    let depth = 2 * n;
    let t0: Vec<Tile> = inst.t0.iter().cloned().collect();
    let x = fresh.fresh("x");
    let hit = disj(t0.iter().map(|t| {
        and(
            Formula::Prop(tile_prop_level(t, j)),
            Formula::Prop(tile_prop_level(t, j_prime)),
        )
    }));
    forall(
        x.as_str(),
        implies(
            and(bind(&x, depth, fresh), first_row(&x, n)),
            at_depth(&x, depth, hit),
        ),
    )
}

/// The full quantifier-alternating reduction formula for an AMTP instance:
/// satisfiable over trees iff the instance is positive.
pub fn amtp_reduction(inst: &AmtpInstance, fresh: &mut FreshNames) -> Result<Formula, SchemaError> {
    if inst.n % 2 != 0 {
        return Err(SchemaError::BadParameter("alternating multi-tiling needs an even n"));
    }
    let n = inst.n;
    let t0: Vec<Tile> = inst.t0.iter().cloned().collect();

    let init_all = conj((1..=n).map(|j| amtp_components(inst, j, fresh).init));

    let upper: Vec<AmtpComponents> =
        (n + 1..=2 * n).map(|j| amtp_components(inst, j, fresh)).collect();
    let tilings = conj(upper.iter().enumerate().map(|(idx, c)| {
        let j = n + 1 + idx;
        and(
            and(c.cov.clone(), and(c.hori.clone(), c.verti.clone())),
            amtp_coinci(inst, j, j - n, fresh),
        )
    }));
    let multis = conj(
        upper[..upper.len().saturating_sub(1)]
            .iter()
            .map(|c| c.multi.clone()),
    );
    let accept = upper
        .last()
        .map(|c| c.acc.clone())
        .unwrap_or(Formula::False);

    let mut inner = and(and(tilings, multis), accept);
    // ∃ over every tile proposition of the upper levels, innermost last
    for j in (n + 1..=2 * n).rev() {
        for t in inst.tiles.iter().rev() {
            inner = exists(tile_prop_level(t, j).as_str(), inner);
        }
    }
    let mut body = implies(init_all, inner);
    // the alternating prefix ∀T₀¹ ∃T₀² … ∀T₀^{n−1} ∃T₀ⁿ
    for j in (1..=n).rev() {
        for t in t0.iter().rev() {
            let name = tile_prop_level(t, j);
            body = if j % 2 == 1 {
                forall(name.as_str(), body)
            } else {
                exists(name.as_str(), body)
            };
        }
    }
    Ok(and(grid(n, fresh), body))
}

/// The mutually recursive type/first/last/unique/compl family at tower
/// height `k` with base width `n`; `unique` and `compl` exist for `k ≥ 1`.
#[derive(Debug, Clone)]
pub struct TypeFamily {
    pub type_of: Formula,
    pub first: Formula,
    pub last: Formula,
    pub unique: Option<Formula>,
    pub compl: Option<Formula>,
}

/// Comparison relation over node numbers: `Succ` (second is first plus
/// one), `Gt(x̄, ȳ)` (the x̄ number is strictly below the ȳ number), `Eq`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareRel {
    Succ,
    Gt,
    Eq,
}

fn check_tower(k: usize) -> Result<(), SchemaError> {
    if k > MAX_TOWER_HEIGHT {
        return Err(SchemaError::SizeCap { k, max: MAX_TOWER_HEIGHT });
    }
    Ok(())
}

/// `type_k` and companions.
pub fn type_family(k: usize, n: usize, fresh: &mut FreshNames) -> Result<TypeFamily, SchemaError> {
    check_tower(k)?;
    if n == 0 {
        return Err(SchemaError::BadParameter("type family needs n ≥ 1"));
    }
    if k == 0 {
        return Ok(TypeFamily {
            type_of: Formula::True,
            first: conj((0..n).rev().map(|i| not(p_bit(i)))),
            last: conj((0..n).rev().map(p_bit)),
            unique: None,
            compl: None,
        });
    }
    let below = type_family(k - 1, n, fresh)?;

    let x = fresh.fresh("x");
    let y = fresh.fresh("y");
    let unique = forall(
        x.as_str(),
        forall(
            y.as_str(),
            implies(
                distinct_bind(&[x.clone(), y.clone()], 1, fresh).expect("distinct"),
                not(compare(
                    k,
                    1,
                    n,
                    &NominalPath(vec![x.clone()]),
                    &NominalPath(vec![y.clone()]),
                    CompareRel::Eq,
                    fresh,
                )?),
            ),
        ),
    );

    let cx = fresh.fresh("x");
    let cy = fresh.fresh("y");
    let compl = forall(
        cx.as_str(),
        implies(
            and(
                bind(&cx, 1, fresh),
                at_depth(&cx, 1, not(below.last.clone())),
            ),
            exists(
                cy.as_str(),
                and(
                    bind(&cy, 1, fresh),
                    compare(
                        k,
                        1,
                        n,
                        &NominalPath(vec![cx.clone()]),
                        &NominalPath(vec![cy.clone()]),
                        CompareRel::Succ,
                        fresh,
                    )?,
                ),
            ),
        ),
    );

    let type_of = conj([
        ax(below.type_of.clone()),
        ex(below.first.clone()),
        unique.clone(),
        compl.clone(),
    ]);
    Ok(TypeFamily {
        type_of,
        first: ax(not(val())),
        last: ax(val()),
        unique: Some(unique),
        compl: Some(compl),
    })
}

/// Number comparison between the nodes named by the paths `x̄` and `ȳ`
/// (both of length `d`, naming nodes of type `k − d`).
///
/// The base case `k = d` compares the `p`-bit encodings directly; the
/// general case introduces an lsr-partition marking the pivot bit and
/// recurses one level down.
pub fn compare(
    k: usize,
    d: usize,
    n: usize,
    xs: &NominalPath,
    ys: &NominalPath,
    rel: CompareRel,
    fresh: &mut FreshNames,
) -> Result<Formula, SchemaError> {
    check_tower(k)?;
    if xs.len() != d || ys.len() != d {
        return Err(SchemaError::ArityMismatch {
            expected: d,
            got: if xs.len() != d { xs.len() } else { ys.len() },
        });
    }
    if d == 0 || d > k {
        return Err(SchemaError::BadDepth { d, k });
    }
    if let CompareRel::Eq = rel {
        let lt = compare(k, d, n, xs, ys, CompareRel::Gt, fresh)?;
        let gt = compare(k, d, n, ys, xs, CompareRel::Gt, fresh)?;
        return Ok(and(not(lt), not(gt)));
    }
    if k == d {
        // type-0 comparison over the p-bits, p0 least significant
        let cases = (0..n).map(|i| match rel {
            CompareRel::Succ => {
                let mut parts = vec![
                    at(xs, and(not(p_bit(i)), conj((0..i).map(p_bit)))),
                    at(ys, and(conj((0..i).map(|j| not(p_bit(j)))), p_bit(i))),
                ];
                parts.extend(
                    (i + 1..n).map(|j| iff(at(xs, p_bit(j)), at(ys, p_bit(j)))),
                );
                conj(parts)
            }
            CompareRel::Gt => {
                let mut parts = vec![at(ys, p_bit(i)), at(xs, not(p_bit(i)))];
                parts.extend(
                    (i + 1..n).map(|j| iff(at(xs, p_bit(j)), at(ys, p_bit(j)))),
                );
                conj(parts)
            }
            CompareRel::Eq => unreachable!(),
        });
        return Ok(disj(cases));
    }

    // general case: k − d ≥ 1
    let select = and(
        at(xs, ax(implies(Formula::Prop(sel()), not(val())))),
        at(ys, ax(implies(Formula::Prop(sel()), val()))),
    );
    let left = and(
        compare_left(k, d, n, xs, ys, fresh)?,
        compare_left(k, d, n, ys, xs, fresh)?,
    );
    let partitioned = and(lsr(k, d, n, xs, fresh)?, lsr(k, d, n, ys, fresh)?);
    let body = match rel {
        CompareRel::Succ => {
            let right = and(
                at(xs, ax(implies(Formula::Prop(rgt()), val()))),
                at(ys, ax(implies(Formula::Prop(rgt()), not(val())))),
            );
            conj([partitioned, left, select, right])
        }
        CompareRel::Gt => conj([partitioned, left, select]),
        CompareRel::Eq => unreachable!(),
    };
    // succ quantifies ∃ lft, sel, rgt; gt quantifies ∃ sel, lft, rgt
    let order: [PropName; 3] = match rel {
        CompareRel::Succ => [lft(), sel(), rgt()],
        CompareRel::Gt => [sel(), lft(), rgt()],
        CompareRel::Eq => unreachable!(),
    };
    let mut f = body;
    for name in order.iter().rev() {
        f = exists(name.as_str(), f);
    }
    Ok(f)
}

/// One direction of the left-block agreement: every `lft` child below `x̄`
/// has an `lft` partner below `ȳ` with the same bit number and bit value.
fn compare_left(
    k: usize,
    d: usize,
    n: usize,
    xs: &NominalPath,
    ys: &NominalPath,
    fresh: &mut FreshNames,
) -> Result<Formula, SchemaError> {
    let w = PropName::new("w");
    let w2 = PropName::new("w_");
    let same_number = compare(
        k,
        d + 1,
        n,
        &xs.push(w.clone()),
        &ys.push(w2.clone()),
        CompareRel::Eq,
        fresh,
    )?;
    let same_value = iff(at(&xs.push(w.clone()), val()), at(&ys.push(w2.clone()), val()));
    let witness = exists(
        w2.as_str(),
        and(
            at(
                ys,
                and(
                    bind(&w2, 1, fresh),
                    at_depth(&w2, 1, Formula::Prop(lft())),
                ),
            ),
            and(same_number, same_value),
        ),
    );
    Ok(forall(
        w.as_str(),
        implies(
            at(
                xs,
                and(bind(&w, 1, fresh), at_depth(&w, 1, Formula::Prop(lft()))),
            ),
            witness,
        ),
    ))
}

/// The lsr-partition constraint at the node named by `x̄` (of type
/// `k − d`): every child carries exactly one of `lft`/`sel`/`rgt`, exactly
/// one child carries `sel`, and numbers order as `rgt < sel < lft`.
pub fn lsr(
    k: usize,
    d: usize,
    n: usize,
    xs: &NominalPath,
    fresh: &mut FreshNames,
) -> Result<Formula, SchemaError> {
    check_tower(k)?;
    if d >= k {
        return Err(SchemaError::BadLsrDepth { d, k });
    }
    if xs.len() != d {
        return Err(SchemaError::ArityMismatch { expected: d, got: xs.len() });
    }
    let (l, s, r) = (Formula::Prop(lft()), Formula::Prop(sel()), Formula::Prop(rgt()));
    let one_of = and(
        or(or(s.clone(), l.clone()), r.clone()),
        conj([
            not(and(s.clone(), l.clone())),
            not(and(s.clone(), r.clone())),
            not(and(l.clone(), r.clone())),
        ]),
    );
    let lsr1 = at(xs, ax(one_of));
    let lsr2 = at(xs, count_children(&CountSpec::Exactly(1, s.clone()), fresh));
    let w = PropName::new("w");
    let w2 = PropName::new("w_");
    let picks = or(
        and(at_depth(&w, 1, s.clone()), at_depth(&w2, 1, r.clone())),
        and(at_depth(&w, 1, l), at_depth(&w2, 1, s)),
    );
    let smaller = compare(
        k - d,
        1,
        n,
        &NominalPath(vec![w2.clone()]),
        &NominalPath(vec![w.clone()]),
        CompareRel::Gt,
        fresh,
    )?;
    let lsr3 = at(
        xs,
        forall(
            w.as_str(),
            forall(
                w2.as_str(),
                implies(
                    and(
                        distinct_bind(&[w.clone(), w2.clone()], 1, fresh).expect("distinct"),
                        picks,
                    ),
                    smaller,
                ),
            ),
        ),
    );
    Ok(conj([lsr1, lsr2, lsr3]))
}

/// `nb-eq-t(k, n)`: a type-`k` node's number equals `t(k, n)`; defined for
/// `k ≥ 1` (those are the instances the tiling reduction uses).
pub fn nb_eq_tower(k: usize, n: usize) -> Result<Formula, SchemaError> {
    check_tower(k)?;
    if k == 0 {
        return Err(SchemaError::BadParameter("nb-eq-t is exposed for k ≥ 1 only"));
    }
    if n == 0 || (n >= 1 && (1usize << n.min(30)) <= n && n >= (1 << n.min(30))) {
        if n == 0 {
            return Err(SchemaError::BadParameter("nb-eq-t needs n ≥ 1"));
        }
    }
    if k == 1 {
        // AX(val ↔ X_n = n): the child carrying val is exactly number n
        let encode_n = conj((0..n).rev().map(|i| {
            if n & (1 << i) != 0 {
                p_bit(i)
            } else {
                not(p_bit(i))
            }
        }));
        Ok(ax(iff(val(), encode_n)))
    } else {
        Ok(ax(iff(val(), nb_eq_tower(k - 1, n)?)))
    }
}

/// The grid tiling reduction `φ_P` for a `Tiling_k` instance: a type-`k+1`
/// root, an lsr-partition singling out the first `t(k, n)` children via a
/// `sel` child numbered exactly `t(k, n)`, and the covering, initial and
/// matching constraints on the induced grid.
pub fn tiling_reduction(
    inst: &TilingInstance,
    k: usize,
    fresh: &mut FreshNames,
) -> Result<Formula, SchemaError> {
    check_tower(k + 1)?;
    let n = inst.n();
    let family = type_family(k + 1, n, fresh)?;
    let below = type_family(k, n, fresh)?;
    let tiles: Vec<Tile> = inst.tiles.clone();

    let cov = {
        let x = fresh.fresh("x");
        let y = fresh.fresh("y");
        let tile_props: Vec<PropName> = tiles.iter().map(tile_prop).collect();
        let body = at(
            &NominalPath(vec![x.clone(), y.clone()]),
            exactly_one_of(tile_props),
        );
        forall(
            x.as_str(),
            forall(
                y.as_str(),
                implies(
                    conj([
                        bind(&x, 1, fresh),
                        at_depth(&x, 1, Formula::Prop(rgt())),
                        at_depth(&x, 1, bind(&y, 1, fresh)),
                    ]),
                    body,
                ),
            ),
        )
    };

    let matching = |relation: &BTreeSet<(Tile, Tile)>,
                    horizontal: bool,
                    fresh: &mut FreshNames|
     -> Result<Formula, SchemaError> {
        let x = fresh.fresh("x");
        let x2 = fresh.fresh("x");
        let y = fresh.fresh("y");
        let y2 = fresh.fresh("y");
        let px = NominalPath(vec![x.clone()]);
        let px2 = NominalPath(vec![x2.clone()]);
        let pxy = NominalPath(vec![x.clone(), y.clone()]);
        let px2y2 = NominalPath(vec![x2.clone(), y2.clone()]);
        let coords = if horizontal {
            // first coordinate steps, second agrees
            and(
                compare(k + 1, 1, n, &px, &px2, CompareRel::Succ, fresh)?,
                compare(k + 1, 2, n, &pxy, &px2y2, CompareRel::Eq, fresh)?,
            )
        } else {
            and(
                compare(k + 1, 1, n, &px, &px2, CompareRel::Eq, fresh)?,
                compare(k + 1, 2, n, &pxy, &px2y2, CompareRel::Succ, fresh)?,
            )
        };
        let antecedent = conj([
            bind(&x, 1, fresh),
            at_depth(&x, 1, Formula::Prop(rgt())),
            bind(&x2, 1, fresh),
            at_depth(&x2, 1, Formula::Prop(rgt())),
            at_depth(&x, 1, bind(&y, 1, fresh)),
            at_depth(&x2, 1, bind(&y2, 1, fresh)),
            coords,
        ]);
        let hit = disj(relation.iter().map(|(t, u)| {
            and(
                at(&pxy, Formula::Prop(tile_prop(t))),
                at(&px2y2, Formula::Prop(tile_prop(u))),
            )
        }));
        Ok(forall(
            x.as_str(),
            forall(
                x2.as_str(),
                forall(y.as_str(), forall(y2.as_str(), implies(antecedent, hit))),
            ),
        ))
    };
    let phi_h = matching(&inst.hori, true, fresh)?;
    let phi_v = matching(&inst.verti, false, fresh)?;

    let init = {
        let x = fresh.fresh("x");
        let rows = conj((0..n).map(|i| {
            let count = count_children(&CountSpec::Exactly(i, Formula::Prop(rgt())), fresh);
            let body = conj([
                lsr(k, 0, n, &NominalPath::empty(), fresh).expect("d = 0 < k"),
                count,
                ex(and(
                    Formula::Prop(sel()),
                    Formula::Prop(tile_prop(&inst.init[i])),
                )),
            ]);
            exists(
                lft().as_str(),
                exists(sel().as_str(), exists(rgt().as_str(), body)),
            )
        }));
        forall(
            x.as_str(),
            implies(
                and(bind(&x, 1, fresh), at_depth(&x, 1, below.first.clone())),
                at_depth(&x, 1, rows),
            ),
        )
    };

    let body = conj([
        lsr(k + 1, 0, n, &NominalPath::empty(), fresh)?,
        ex(and(Formula::Prop(sel()), nb_eq_tower(k, n)?)),
        cov,
        init,
        phi_h,
        phi_v,
    ]);
    let quantified = exists(
        lft().as_str(),
        exists(sel().as_str(), exists(rgt().as_str(), body)),
    );
    Ok(and(family.type_of, quantified))
}

// --- canonical witness trees -------------------------------------------------

fn encode_bits(tree: &mut TreeModel, node: NodeId, m: u64, n: usize) {
    for bit in 0..n {
        if m & (1 << bit) != 0 {
            tree.labels_mut(node).insert(PropName::new(format!("p{bit}")));
        }
    }
}

fn build_typed(
    tree: &mut TreeModel,
    node: NodeId,
    k: usize,
    n: usize,
    number: u64,
    cap: u64,
) -> Result<(), SchemaError> {
    if k == 0 {
        encode_bits(tree, node, number, n);
        return Ok(());
    }
    let width = tetration_capped(k, n, cap).map_err(|_| SchemaError::TreeCap { k, n })?;
    for i in 0..width {
        let child = tree.add_child(node, []);
        if number & (1 << i) != 0 {
            tree.labels_mut(child).insert(PropName::new("val"));
        }
        build_typed(tree, child, k - 1, n, i, cap)?;
    }
    Ok(())
}

/// The canonical type-`k` tree for width `n`: a balanced tree whose type-`j`
/// nodes have children numbered exactly `0 … t(j,n)−1`; the root's own
/// number is `0`.
pub fn canonical_type_tree(k: usize, n: usize) -> Result<TreeModel, SchemaError> {
    let mut tree = TreeModel::leaf([]);
    build_typed(&mut tree, NodeId(0), k, n, 0, DEFAULT_TETRATION_CAP)?;
    Ok(tree)
}

/// A full binary tree of depth `2n` whose `4^n` frontier nodes enumerate
/// all `(h, v)` coordinate pairs: leaf index `ℓ` encodes `h = ℓ >> n`,
/// `v = ℓ mod 2^n`.
pub fn canonical_grid_tree(n: usize) -> TreeModel {
    let mut tree = TreeModel::leaf([]);
    let mut frontier = vec![NodeId(0)];
    for _ in 0..2 * n {
        let mut next = Vec::new();
        for v in frontier {
            next.push(tree.add_child(v, []));
            next.push(tree.add_child(v, []));
        }
        frontier = next;
    }
    for (idx, &leaf) in frontier.iter().enumerate() {
        let h = idx >> n;
        let v = idx & ((1 << n) - 1);
        for bit in 0..n {
            if h & (1 << bit) != 0 {
                tree.labels_mut(leaf).insert(PropName::new(format!("h{bit}")));
            }
            if v & (1 << bit) != 0 {
                tree.labels_mut(leaf).insert(PropName::new(format!("v{bit}")));
            }
        }
    }
    tree
}

/// Leaves of [`canonical_grid_tree`] in index order.
pub fn grid_leaves(tree: &TreeModel) -> Vec<NodeId> {
    let mut leaves: Vec<NodeId> = tree.node_ids().filter(|&v| tree.is_leaf(v)).collect();
    leaves.sort();
    leaves
}

/// The canonical model for a solved `Tiling_k` instance: the type-`k+1`
/// tree with the solution's tiles written onto the grid cells (root child
/// number `h`, grandchild number `v`).
pub fn tiling_witness_tree(
    inst: &TilingInstance,
    k: usize,
    tau: &crate::tiling::Tiling,
) -> Result<TreeModel, SchemaError> {
    let n = inst.n();
    let mut tree = canonical_type_tree(k + 1, n)?;
    let side = tetration_capped(k, n, DEFAULT_TETRATION_CAP)
        .map_err(|_| SchemaError::TreeCap { k, n })? as usize;
    assert_eq!(tau.side, side, "solution side must match t(k, n)");
    let root = tree.root();
    for h in 0..side {
        let column = tree.children(root)[h];
        for v in 0..side {
            let cell = tree.children(column)[v];
            let tile = tau.tile(inst, h, v).clone();
            tree.labels_mut(cell).insert(tile_prop(&tile));
        }
    }
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::{check_root, Backend};
    use crate::trees::FrontierMode;

    fn fresh() -> FreshNames {
        FreshNames::default()
    }

    fn holds(t: &TreeModel, f: &Formula) -> bool {
        check_root(t, FrontierMode::SelfLoop, f, Backend::Pruned)
            .unwrap()
            .verdict
    }

    #[test]
    fn bind_characterizes_unique_depth_one() {
        let x = PropName::new("x");
        let f = bind(&x, 1, &mut fresh());
        let mut good = TreeModel::leaf([]);
        good.add_child(good.root(), [x.clone()]);
        good.add_child(good.root(), []);
        assert!(holds(&good, &f));

        let mut bad = TreeModel::leaf([]);
        bad.add_child(bad.root(), [x.clone()]);
        bad.add_child(bad.root(), [x.clone()]);
        assert!(!holds(&bad, &f));

        // depth 2 with no depth-2 node at all: EX² x fails on the bare tree
        let deep = bind(&x, 2, &mut fresh());
        let mut shallow = TreeModel::leaf([]);
        shallow.add_child(shallow.root(), [x.clone()]);
        let strict = check_root(&shallow, FrontierMode::Strict, &deep, Backend::Pruned)
            .unwrap()
            .verdict;
        assert!(!strict);
    }

    #[test]
    fn at_schema_shapes() {
        let p = prop("p");
        assert_eq!(at(&NominalPath::empty(), p.clone()), p);
        assert_eq!(
            at(&NominalPath::of(&["x"]), p.clone()).render(),
            "EX (x & p)",
        );
        assert_eq!(
            at(&NominalPath::of(&["x", "y"]), p).render(),
            "EX (x & EX (y & p))",
        );
    }

    #[test]
    fn distinct_bind_separates_nodes() {
        let x = PropName::new("x");
        let y = PropName::new("y");
        let f = distinct_bind(&[x.clone(), y.clone()], 1, &mut fresh()).unwrap();

        let mut apart = TreeModel::leaf([]);
        apart.add_child(apart.root(), [x.clone()]);
        apart.add_child(apart.root(), [y.clone()]);
        assert!(holds(&apart, &f));

        let mut together = TreeModel::leaf([]);
        together.add_child(together.root(), [x.clone(), y.clone()]);
        assert!(!holds(&together, &f));

        assert_eq!(
            distinct_bind(&[x.clone(), x.clone()], 1, &mut fresh()),
            Err(SchemaError::DuplicateName("x".into())),
        );

        // a single name degenerates to plain bind
        let single = distinct_bind(&[x.clone()], 1, &mut FreshNames::default()).unwrap();
        let plain = bind(&x, 1, &mut FreshNames::default());
        assert_eq!(single, plain);
    }

    #[test]
    fn uni_examples() {
        let p = PropName::new("p");
        let f = uni(&[p.clone()], &mut fresh());

        let mut differ = TreeModel::leaf([]);
        differ.add_child(differ.root(), []);
        differ.add_child(differ.root(), [p.clone()]);
        assert!(holds(&differ, &f));

        let mut same = TreeModel::leaf([]);
        same.add_child(same.root(), []);
        same.add_child(same.root(), []);
        assert!(!holds(&same, &f));

        let mut only = TreeModel::leaf([]);
        only.add_child(only.root(), []);
        assert!(holds(&only, &f));
    }

    #[test]
    fn count_children_examples() {
        let mut two = TreeModel::leaf([]);
        two.add_child(two.root(), []);
        two.add_child(two.root(), []);
        let exactly2 = count_children(&CountSpec::Exactly(2, Formula::True), &mut fresh());
        assert!(holds(&two, &exactly2));
        let mut three = TreeModel::leaf([]);
        three.add_child(three.root(), []);
        three.add_child(three.root(), []);
        three.add_child(three.root(), []);
        assert!(!holds(&three, &exactly2));

        let none = count_children(&CountSpec::Exactly(0, prop("p")), &mut fresh());
        assert_eq!(none.render(), "AX ~p");

        // 3 children cannot stay pairwise distinct on one bit
        let pow = count_children(&CountSpec::AtMostPow2(1), &mut fresh());
        assert!(!holds(&three, &pow));
        assert!(holds(&two, &pow));
    }

    #[test]
    fn neighbor_bit_arithmetic() {
        // n=1 grid: positions (h, v) on the 4 leaves
        let t = canonical_grid_tree(1);
        let leaves = grid_leaves(&t);
        let x = PropName::new("x");
        let y = PropName::new("y");
        let hn = neighbor(&x, &y, 1, Axis::Horizontal);
        let vn = neighbor(&x, &y, 1, Axis::Vertical);
        // leaf index ℓ: h = ℓ >> 1, v = ℓ & 1
        let place = |t: &TreeModel, xi: usize, yi: usize| {
            let mut t = t.clone();
            t.labels_mut(leaves[xi]).insert(x.clone());
            t.labels_mut(leaves[yi]).insert(y.clone());
            t
        };
        // (0,0) → (1,0): horizontal neighbour
        let t1 = place(&t, 0, 2);
        assert!(holds(&t1, &hn));
        assert!(!holds(&t1, &vn));
        // (0,0) → (0,1): vertical neighbour
        let t2 = place(&t, 0, 1);
        assert!(!holds(&t2, &hn));
        assert!(holds(&t2, &vn));
        // same leaf: H+1 ≠ H
        let t3 = place(&t, 0, 0);
        assert!(!holds(&t3, &hn));
    }

    #[test]
    fn grid_holds_on_canonical_tree() {
        let f = grid(1, &mut fresh());
        let t = canonical_grid_tree(1);
        assert!(holds(&t, &f));

        // two leaves sharing coordinates break the lower part
        let mut shared = t.clone();
        let leaves = grid_leaves(&shared);
        let copy: Vec<PropName> = shared.labels(leaves[0]).iter().cloned().collect();
        let l1 = leaves[1];
        shared.labels_mut(l1).clear();
        for p in copy {
            shared.labels_mut(l1).insert(p);
        }
        assert!(!holds(&shared, &f));

        // a chain is not a grid: the EX_{=2} conjunct fails at the root
        let mut chain = TreeModel::leaf([]);
        let c = chain.add_child(chain.root(), []);
        chain.add_child(c, []);
        assert!(!holds(&chain, &f));
    }

    #[test]
    fn type_family_base_cases() {
        let fam = type_family(0, 2, &mut fresh()).unwrap();
        assert_eq!(fam.type_of, Formula::True);
        assert_eq!(fam.first.render(), "~p1 & ~p0");
        assert_eq!(fam.last.render(), "p1 & p0");
        assert!(fam.unique.is_none());

        let fam1 = type_family(1, 1, &mut fresh()).unwrap();
        assert_eq!(fam1.first.render(), "AX ~val");
        assert_eq!(fam1.last.render(), "AX val");
    }

    #[test]
    fn type_one_on_canonical_tree() {
        let fam = type_family(1, 1, &mut fresh()).unwrap();
        let good = canonical_type_tree(1, 1).unwrap();
        assert!(holds(&good, &fam.type_of));

        // duplicate child numbers falsify it
        let mut dup = TreeModel::leaf([]);
        dup.add_child(dup.root(), []);
        dup.add_child(dup.root(), []);
        assert!(!holds(&dup, &fam.type_of));

        // three children falsify it
        let mut three = canonical_type_tree(1, 1).unwrap();
        three.add_child(three.root(), []);
        assert!(!holds(&three, &fam.type_of));
    }

    #[test]
    fn compare_base_case_matches_arithmetic() {
        // k = d = 1, n = 2: numbers 0..4 on two depth-1 nominals
        let x = PropName::new("x");
        let y = PropName::new("y");
        let xp = NominalPath(vec![x.clone()]);
        let yp = NominalPath(vec![y.clone()]);
        for a in 0u64..4 {
            for b in 0u64..4 {
                let mut t = TreeModel::leaf([]);
                let cx = t.add_child(t.root(), [x.clone()]);
                let cy = t.add_child(t.root(), [y.clone()]);
                encode_bits(&mut t, cx, a, 2);
                encode_bits(&mut t, cy, b, 2);
                let succ =
                    compare(1, 1, 2, &xp, &yp, CompareRel::Succ, &mut fresh()).unwrap();
                let gt = compare(1, 1, 2, &xp, &yp, CompareRel::Gt, &mut fresh()).unwrap();
                let eq = compare(1, 1, 2, &xp, &yp, CompareRel::Eq, &mut fresh()).unwrap();
                assert_eq!(holds(&t, &succ), b == a + 1, "succ {a} {b}");
                assert_eq!(holds(&t, &gt), a < b, "gt {a} {b}");
                assert_eq!(holds(&t, &eq), a == b, "eq {a} {b}");
            }
        }
    }

    #[test]
    fn compare_rejects_bad_arity() {
        let xp = NominalPath::of(&["x"]);
        let yp = NominalPath::of(&["y", "z"]);
        assert!(matches!(
            compare(2, 2, 1, &xp, &yp, CompareRel::Eq, &mut fresh()),
            Err(SchemaError::ArityMismatch { .. }),
        ));
    }

    #[test]
    fn nb_eq_tower_schema() {
        assert_eq!(nb_eq_tower(1, 1).unwrap().render(), "AX (val <-> p0)");
        assert!(nb_eq_tower(0, 1).is_err());

        // canonical type-1 node (n=1) with val exactly on child number 1 has
        // number 2 = t(1,1)
        let f = nb_eq_tower(1, 1).unwrap();
        let mut t = TreeModel::leaf([]);
        t.add_child(t.root(), []);
        let c1 = t.add_child(t.root(), [PropName::new("p0")]);
        t.labels_mut(c1).insert(PropName::new("val"));
        assert!(holds(&t, &f));

        // val on both children means number 3
        let mut t2 = t.clone();
        let c0 = t2.children(t2.root())[0];
        t2.labels_mut(c0).insert(PropName::new("val"));
        assert!(!holds(&t2, &f));
    }

    #[test]
    fn canonical_type_tree_is_typed() {
        for (k, n) in [(1, 1), (1, 2), (2, 1)] {
            let t = canonical_type_tree(k, n).unwrap();
            assert!(crate::trees::node_type(&t, t.root(), k, n, DEFAULT_TETRATION_CAP).unwrap());
        }
        let t21 = canonical_type_tree(2, 1).unwrap();
        assert_eq!(t21.len(), 1 + 4 + 8);
    }

    #[test]
    fn lsr_spec_examples() {
        // canonical type-1 node at n=1: children numbered 0 and 1
        let base = canonical_type_tree(1, 1).unwrap();
        let f = lsr(1, 0, 1, &NominalPath::empty(), &mut fresh()).unwrap();
        let with = |labels: [&[&str]; 2]| {
            let mut t = base.clone();
            for (i, ls) in labels.iter().enumerate() {
                let c = t.children(t.root())[i];
                for l in *ls {
                    t.labels_mut(c).insert(PropName::new(*l));
                }
            }
            t
        };
        // rgt on number 0, sel on number 1: rgt < sel holds
        assert!(holds(&with([&["rgt"], &["sel"]]), &f));
        // two sels break uniqueness
        assert!(!holds(&with([&["sel"], &["sel"]]), &f));
        // sel on 0, lft on 1: sel < lft holds (numbers order rgt < sel < lft)
        assert!(holds(&with([&["sel"], &["lft"]]), &f));
        // lft on 0, sel on 1 breaks the ordering
        assert!(!holds(&with([&["lft"], &["sel"]]), &f));
        // a child with no marker breaks the partition
        assert!(!holds(&with([&["sel"], &[]]), &f));
    }
}
