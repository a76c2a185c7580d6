//! Grid tiling and alternating multi-tiling: data model and brute-force
//! solvers. These are the independent oracles the reduction generators are
//! validated against; nothing here aims to scale.
//!
//! Orientation convention, applied uniformly to solvers and formula
//! generators: a tiling `τ(h, v)` steps its first coordinate under the
//! horizontal relation and its second under the vertical one, and the
//! initial condition pins `τ(0, i) = c_i`.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use serde::Deserialize;

pub type Tile = String;

/// `Tiling_k` instance: tiles, matching relations and the initial condition
/// `c = t_0 … t_{n−1}` whose length fixes `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TilingInstance {
    pub tiles: Vec<Tile>,
    pub hori: BTreeSet<(Tile, Tile)>,
    pub verti: BTreeSet<(Tile, Tile)>,
    pub init: Vec<Tile>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TilingError {
    #[error("initial condition must be nonempty")]
    EmptyInit,
    #[error("unknown tile `{0}` in {1}")]
    UnknownTile(String, &'static str),
    #[error("n must be even for an alternating multi-tiling instance, got {0}")]
    OddN(usize),
    #[error("tiling side mismatch: expected {expected}, got {got}")]
    SideMismatch { expected: u64, got: usize },
    #[error("tetration value t({k},{n}) exceeds the cap {cap}")]
    Cap { k: usize, n: usize, cap: u64 },
    #[error("search space too large: {0}")]
    SearchCap(String),
}

impl TilingInstance {
    pub fn new(
        tiles: Vec<Tile>,
        hori: BTreeSet<(Tile, Tile)>,
        verti: BTreeSet<(Tile, Tile)>,
        init: Vec<Tile>,
    ) -> Result<Self, TilingError> {
        if init.is_empty() {
            return Err(TilingError::EmptyInit);
        }
        let known = |t: &Tile| tiles.contains(t);
        for (a, b) in hori.iter() {
            if !known(a) || !known(b) {
                return Err(TilingError::UnknownTile(
                    if known(a) { b.clone() } else { a.clone() },
                    "horizontal relation",
                ));
            }
        }
        for (a, b) in verti.iter() {
            if !known(a) || !known(b) {
                return Err(TilingError::UnknownTile(
                    if known(a) { b.clone() } else { a.clone() },
                    "vertical relation",
                ));
            }
        }
        for t in &init {
            if !known(t) {
                return Err(TilingError::UnknownTile(t.clone(), "initial condition"));
            }
        }
        Ok(TilingInstance { tiles, hori, verti, init })
    }

    /// Length of the initial condition; the grid side is `t(k, n)`.
    pub fn n(&self) -> usize {
        self.init.len()
    }
}

/// Alternating multi-tiling instance; `n` is even and also fixes both the
/// grid side `2^n` and the number of stacked tilings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmtpInstance {
    pub n: usize,
    pub tiles: Vec<Tile>,
    pub hori: BTreeSet<(Tile, Tile)>,
    pub verti: BTreeSet<(Tile, Tile)>,
    pub t0: BTreeSet<Tile>,
    pub acc: BTreeSet<Tile>,
    pub multi: BTreeSet<(Tile, Tile)>,
}

impl AmtpInstance {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n: usize,
        tiles: Vec<Tile>,
        hori: BTreeSet<(Tile, Tile)>,
        verti: BTreeSet<(Tile, Tile)>,
        t0: BTreeSet<Tile>,
        acc: BTreeSet<Tile>,
        multi: BTreeSet<(Tile, Tile)>,
    ) -> Result<Self, TilingError> {
        if n % 2 != 0 {
            return Err(TilingError::OddN(n));
        }
        let known = |t: &Tile| tiles.contains(t);
        if let Some(t) = t0.iter().chain(acc.iter()).find(|t| !known(t)) {
            return Err(TilingError::UnknownTile(t.clone(), "tile subset"));
        }
        if let Some((a, b)) = multi.iter().find(|(a, b)| !known(a) || !known(b)) {
            let bad = if known(a) { b.clone() } else { a.clone() };
            return Err(TilingError::UnknownTile(bad, "multi relation"));
        }
        Ok(AmtpInstance { n, tiles, hori, verti, t0, acc, multi })
    }

    /// Builds an instance without the evenness check. The per-level grid
    /// formulas are meaningful for any `n`; only the alternating reduction
    /// and solver require an even one.
    #[allow(clippy::too_many_arguments)]
    pub fn unrestricted(
        n: usize,
        tiles: Vec<Tile>,
        hori: BTreeSet<(Tile, Tile)>,
        verti: BTreeSet<(Tile, Tile)>,
        t0: BTreeSet<Tile>,
        acc: BTreeSet<Tile>,
        multi: BTreeSet<(Tile, Tile)>,
    ) -> Self {
        AmtpInstance { n, tiles, hori, verti, t0, acc, multi }
    }
}

/// A total map from the `side × side` grid to tiles, stored row-major in the
/// first coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tiling {
    pub side: usize,
    cells: Vec<usize>, // indices into the instance's tile list
}

impl Tiling {
    pub fn new(side: usize, cells: Vec<usize>) -> Self {
        assert_eq!(cells.len(), side * side, "tiling must be total on its grid");
        Tiling { side, cells }
    }

    pub fn get(&self, h: usize, v: usize) -> usize {
        self.cells[h * self.side + v]
    }

    pub fn tile<'a>(&self, inst: &'a TilingInstance, h: usize, v: usize) -> &'a Tile {
        &inst.tiles[self.get(h, v)]
    }
}

/// Exact tetration `t(k, n)` as an arbitrary-precision natural, refusing
/// past the cap.
pub fn tetration(k: usize, n: usize, cap: u64) -> Result<BigUint, TilingError> {
    crate::trees::tetration_capped(k, n, cap)
        .map(BigUint::from)
        .map_err(|_| TilingError::Cap { k, n, cap })
}

fn side_for(inst: &TilingInstance, k: usize, cap: u64) -> Result<u64, TilingError> {
    let n = inst.n();
    crate::trees::tetration_capped(k, n, cap).map_err(|_| TilingError::Cap { k, n, cap })
}

/// Checks the three tiling conditions literally: `τ(0,i) = c_i` for
/// `i < n`, horizontal matching along the first coordinate, vertical along
/// the second.
pub fn validate_tiling(
    inst: &TilingInstance,
    k: usize,
    tau: &Tiling,
) -> Result<bool, TilingError> {
    let side = side_for(inst, k, crate::trees::DEFAULT_TETRATION_CAP)?;
    if tau.side as u64 != side {
        return Err(TilingError::SideMismatch { expected: side, got: tau.side });
    }
    let side = tau.side;
    for (i, t) in inst.init.iter().enumerate() {
        if tau.tile(inst, 0, i) != t {
            return Ok(false);
        }
    }
    for h in 0..side {
        for v in 0..side {
            if h + 1 < side {
                let pair = (tau.tile(inst, h, v).clone(), tau.tile(inst, h + 1, v).clone());
                if !inst.hori.contains(&pair) {
                    return Ok(false);
                }
            }
            if v + 1 < side {
                let pair = (tau.tile(inst, h, v).clone(), tau.tile(inst, h, v + 1).clone());
                if !inst.verti.contains(&pair) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Complete backtracking search for a solution on the `t(k,n)` grid.
pub fn solve_tiling(inst: &TilingInstance, k: usize) -> Result<Option<Tiling>, TilingError> {
    let side64 = side_for(inst, k, crate::trees::DEFAULT_TETRATION_CAP)?;
    let cells = side64
        .checked_mul(side64)
        .filter(|&c| c <= 1 << 20)
        .ok_or_else(|| TilingError::SearchCap(format!("grid {side64}x{side64}")))?;
    let side = side64 as usize;
    let tile_count = inst.tiles.len();
    let index_of = |t: &Tile| inst.tiles.iter().position(|u| u == t).unwrap();
    let hori: BTreeSet<(usize, usize)> = inst
        .hori
        .iter()
        .map(|(a, b)| (index_of(a), index_of(b)))
        .collect();
    let verti: BTreeSet<(usize, usize)> = inst
        .verti
        .iter()
        .map(|(a, b)| (index_of(a), index_of(b)))
        .collect();
    let mut cellsv = vec![usize::MAX; cells as usize];

    // Cells in (h, v) lexicographic order; neighbours behind us are placed.
    fn rec(
        pos: usize,
        side: usize,
        tile_count: usize,
        init: &[usize],
        hori: &BTreeSet<(usize, usize)>,
        verti: &BTreeSet<(usize, usize)>,
        cells: &mut [usize],
    ) -> bool {
        if pos == cells.len() {
            return true;
        }
        let (h, v) = (pos / side, pos % side);
        let candidates: Vec<usize> = if h == 0 && v < init.len() {
            vec![init[v]]
        } else {
            (0..tile_count).collect()
        };
        for t in candidates {
            let ok_h = h == 0 || hori.contains(&(cells[(h - 1) * side + v], t));
            let ok_v = v == 0 || verti.contains(&(cells[h * side + v - 1], t));
            if ok_h && ok_v {
                cells[pos] = t;
                if rec(pos + 1, side, tile_count, init, hori, verti, cells) {
                    return true;
                }
                cells[pos] = usize::MAX;
            }
        }
        false
    }

    let init: Vec<usize> = inst.init.iter().map(|t| index_of(t)).collect();
    if init.len() > side {
        return Err(TilingError::SearchCap(format!(
            "initial condition longer than grid side {side}",
        )));
    }
    if rec(0, side, tile_count, &init, &hori, &verti, &mut cellsv) {
        Ok(Some(Tiling::new(side, cellsv)))
    } else {
        Ok(None)
    }
}

/// Evaluates the alternating quantifier prefix of an AMTP instance by
/// exhaustive game search: `∀w_1 ∃w_2 … ∀w_{n−1} ∃w_n` over words in
/// `T_0^{2^n}`, with the inner check searching for a multi-tiling satisfying
/// (m-init), (m-tiling), (m-multi) and (m-accept).
///
/// A `∀` over an empty domain is true and an `∃` over an empty domain is
/// false, evaluated literally.
pub fn solve_amtp(inst: &AmtpInstance) -> Result<bool, TilingError> {
    if inst.n % 2 != 0 {
        return Err(TilingError::OddN(inst.n));
    }
    let side = 1usize << inst.n;
    if side > 16 {
        return Err(TilingError::SearchCap(format!("grid side 2^{} = {side}", inst.n)));
    }
    let t0: Vec<Tile> = inst.t0.iter().cloned().collect();
    let word_count = (t0.len() as u128).pow(side as u32);
    if word_count > 1 << 24 {
        return Err(TilingError::SearchCap(format!("{word_count} initial words per level")));
    }
    let mut words = Vec::new();
    enumerate_words(&t0, side, &mut Vec::new(), &mut words);
    Ok(alternation(inst, side, &words, &mut Vec::new()))
}

fn enumerate_words(t0: &[Tile], len: usize, acc: &mut Vec<Tile>, out: &mut Vec<Vec<Tile>>) {
    if acc.len() == len {
        out.push(acc.clone());
        return;
    }
    for t in t0 {
        acc.push(t.clone());
        enumerate_words(t0, len, acc, out);
        acc.pop();
    }
}

fn alternation(
    inst: &AmtpInstance,
    side: usize,
    words: &[Vec<Tile>],
    chosen: &mut Vec<Vec<Tile>>,
) -> bool {
    if chosen.len() == inst.n {
        return has_multi_solution(inst, side, chosen);
    }
    let universal = chosen.len() % 2 == 0; // levels 1, 3, … are ∀
    for w in words {
        chosen.push(w.clone());
        let inner = alternation(inst, side, words, chosen);
        chosen.pop();
        if universal && !inner {
            return false;
        }
        if !universal && inner {
            return true;
        }
    }
    universal
}

/// Searches for `(τ_1, …, τ_n)` with first rows pinned to the chosen words,
/// each layer a tiling, consecutive layers pointwise in the multi relation,
/// and an accepting tile on the last row of `τ_n`.
fn has_multi_solution(inst: &AmtpInstance, side: usize, words: &[Vec<Tile>]) -> bool {
    let tile_count = inst.tiles.len();
    let layers = inst.n;
    let index_of = |t: &Tile| inst.tiles.iter().position(|u| u == t).unwrap();
    let hori: BTreeSet<(usize, usize)> =
        inst.hori.iter().map(|(a, b)| (index_of(a), index_of(b))).collect();
    let verti: BTreeSet<(usize, usize)> =
        inst.verti.iter().map(|(a, b)| (index_of(a), index_of(b))).collect();
    let multi: BTreeSet<(usize, usize)> =
        inst.multi.iter().map(|(a, b)| (index_of(a), index_of(b))).collect();
    let acc: BTreeSet<usize> = inst.acc.iter().map(|t| index_of(t)).collect();
    let pinned: Vec<Vec<usize>> = words
        .iter()
        .map(|w| w.iter().map(|t| index_of(t)).collect())
        .collect();

    // Assign positions in (h, v) order, all layers per position, so the
    // pointwise multi constraint and per-layer neighbour constraints prune
    // immediately.
    let mut grid = vec![usize::MAX; layers * side * side];

    struct Ctx<'a> {
        side: usize,
        layers: usize,
        tile_count: usize,
        hori: &'a BTreeSet<(usize, usize)>,
        verti: &'a BTreeSet<(usize, usize)>,
        multi: &'a BTreeSet<(usize, usize)>,
        acc: &'a BTreeSet<usize>,
        pinned: &'a [Vec<usize>],
    }

    fn rec(ctx: &Ctx<'_>, pos: usize, layer: usize, grid: &mut [usize]) -> bool {
        let side = ctx.side;
        if pos == side * side {
            // (m-accept): some position on the last row of the last layer
            let last = ctx.layers - 1;
            return (0..side).any(|v| {
                ctx.acc.contains(&grid[last * side * side + (side - 1) * side + v])
            });
        }
        if layer == ctx.layers {
            return rec(ctx, pos + 1, 0, grid);
        }
        let (h, v) = (pos / side, pos % side);
        let at = |layer: usize, h: usize, v: usize| layer * side * side + h * side + v;
        let candidates: Vec<usize> = if h == 0 {
            vec![ctx.pinned[layer][v]] // (m-init)
        } else {
            (0..ctx.tile_count).collect()
        };
        for t in candidates {
            let ok_h = h == 0 || ctx.hori.contains(&(grid[at(layer, h - 1, v)], t));
            let ok_v = v == 0 || ctx.verti.contains(&(grid[at(layer, h, v - 1)], t));
            let ok_m = layer == 0 || ctx.multi.contains(&(grid[at(layer - 1, h, v)], t));
            if ok_h && ok_v && ok_m {
                grid[at(layer, h, v)] = t;
                if rec(ctx, pos, layer + 1, grid) {
                    return true;
                }
                grid[at(layer, h, v)] = usize::MAX;
            }
        }
        false
    }

    let ctx = Ctx {
        side,
        layers,
        tile_count,
        hori: &hori,
        verti: &verti,
        multi: &multi,
        acc: &acc,
        pinned: &pinned,
    };
    rec(&ctx, 0, 0, &mut grid)
}

// --- JSON instance file format ----------------------------------------------
//
// {"tiles": [...], "hori": [[t,t'],...], "verti": [...], "init": [...],
//  "t0": [...], "acc": [...], "multi": [...], "n": int}
// with unused fields optional per problem kind.

#[derive(Deserialize)]
struct JsonInstance {
    tiles: Vec<String>,
    #[serde(default)]
    hori: Vec<(String, String)>,
    #[serde(default)]
    verti: Vec<(String, String)>,
    #[serde(default)]
    init: Vec<String>,
    #[serde(default)]
    t0: Vec<String>,
    #[serde(default)]
    acc: Vec<String>,
    #[serde(default)]
    multi: Vec<(String, String)>,
    #[serde(default)]
    n: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum InstanceIoError {
    #[error("invalid instance JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Invalid(#[from] TilingError),
    #[error("field `{0}` is required for this problem kind")]
    Missing(&'static str),
}

pub fn tiling_instance_from_json(text: &str) -> Result<TilingInstance, InstanceIoError> {
    let raw: JsonInstance = serde_json::from_str(text)?;
    if raw.init.is_empty() {
        return Err(InstanceIoError::Missing("init"));
    }
    Ok(TilingInstance::new(
        raw.tiles,
        raw.hori.into_iter().collect(),
        raw.verti.into_iter().collect(),
        raw.init,
    )?)
}

pub fn amtp_instance_from_json(text: &str) -> Result<AmtpInstance, InstanceIoError> {
    let raw: JsonInstance = serde_json::from_str(text)?;
    let n = raw.n.ok_or(InstanceIoError::Missing("n"))?;
    Ok(AmtpInstance::new(
        n,
        raw.tiles,
        raw.hori.into_iter().collect(),
        raw.verti.into_iter().collect(),
        raw.t0.into_iter().collect(),
        raw.acc.into_iter().collect(),
        raw.multi.into_iter().collect(),
    )?)
}

/// The two-tile instance with alternating relations; its 2×2 solutions are
/// checkerboards.
pub fn checkerboard_instance() -> TilingInstance {
    let a = "a".to_string();
    let b = "b".to_string();
    let rel: BTreeSet<(Tile, Tile)> =
        [(a.clone(), b.clone()), (b.clone(), a.clone())].into_iter().collect();
    TilingInstance::new(vec![a.clone(), b], rel.clone(), rel, vec![a]).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tetration_examples() {
        let cap = crate::trees::DEFAULT_TETRATION_CAP;
        assert_eq!(tetration(0, 5, cap).unwrap(), BigUint::from(5u32));
        assert_eq!(tetration(1, 3, cap).unwrap(), BigUint::from(8u32));
        assert_eq!(tetration(3, 1, cap).unwrap(), BigUint::from(16u32));
        assert!(tetration(4, 2, cap).is_err());
    }

    #[test]
    fn checkerboard_validates() {
        let inst = checkerboard_instance();
        // left column a,b; right column b,a — side t(1,1) = 2
        let tau = Tiling::new(2, vec![0, 1, 1, 0]);
        assert!(validate_tiling(&inst, 1, &tau).unwrap());

        let wrong_init = Tiling::new(2, vec![1, 0, 0, 1]);
        assert!(!validate_tiling(&inst, 1, &wrong_init).unwrap());

        let constant = Tiling::new(2, vec![0, 0, 0, 0]);
        assert!(!validate_tiling(&inst, 1, &constant).unwrap());
    }

    #[test]
    fn validate_checks_side() {
        let inst = checkerboard_instance();
        let tau = Tiling::new(3, vec![0; 9]);
        assert!(matches!(
            validate_tiling(&inst, 1, &tau),
            Err(TilingError::SideMismatch { expected: 2, got: 3 }),
        ));
    }

    #[test]
    fn solver_finds_checkerboard() {
        let inst = checkerboard_instance();
        let tau = solve_tiling(&inst, 1).unwrap().expect("checkerboard solvable");
        assert!(validate_tiling(&inst, 1, &tau).unwrap());
    }

    #[test]
    fn solver_fails_without_horizontal_pairs() {
        let a = "a".to_string();
        let b = "b".to_string();
        let verti: BTreeSet<(Tile, Tile)> =
            [(a.clone(), a.clone()), (b.clone(), b.clone())].into_iter().collect();
        let inst =
            TilingInstance::new(vec![a.clone(), b], BTreeSet::new(), verti, vec![a]).unwrap();
        assert_eq!(solve_tiling(&inst, 1).unwrap(), None);
    }

    #[test]
    fn single_tile_total_relations() {
        let a = "a".to_string();
        let rel: BTreeSet<(Tile, Tile)> = [(a.clone(), a.clone())].into_iter().collect();
        let inst = TilingInstance::new(vec![a.clone()], rel.clone(), rel, vec![a]).unwrap();
        let tau = solve_tiling(&inst, 1).unwrap().expect("constant solution");
        assert!(validate_tiling(&inst, 1, &tau).unwrap());
    }

    #[test]
    fn solver_verdict_matches_enumeration_on_two_tiles() {
        // side-2 grids, every relation subset over 2 tiles
        let a = "a".to_string();
        let b = "b".to_string();
        let pairs = [
            (a.clone(), a.clone()),
            (a.clone(), b.clone()),
            (b.clone(), a.clone()),
            (b.clone(), b.clone()),
        ];
        for hmask in 0..16u32 {
            for vmask in 0..16u32 {
                let hori: BTreeSet<(Tile, Tile)> = pairs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| hmask & (1 << i) != 0)
                    .map(|(_, p)| p.clone())
                    .collect();
                let verti: BTreeSet<(Tile, Tile)> = pairs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| vmask & (1 << i) != 0)
                    .map(|(_, p)| p.clone())
                    .collect();
                let inst = TilingInstance::new(
                    vec![a.clone(), b.clone()],
                    hori,
                    verti,
                    vec![a.clone()],
                )
                .unwrap();
                let solved = solve_tiling(&inst, 1).unwrap().is_some();
                let mut any = false;
                for assignment in 0..16u32 {
                    let cells: Vec<usize> =
                        (0..4).map(|i| ((assignment >> i) & 1) as usize).collect();
                    let tau = Tiling::new(2, cells);
                    if validate_tiling(&inst, 1, &tau).unwrap() {
                        any = true;
                        break;
                    }
                }
                assert_eq!(solved, any, "h={hmask:04b} v={vmask:04b}");
            }
        }
    }

    fn singleton_amtp(n: usize) -> AmtpInstance {
        let a = "a".to_string();
        let rel: BTreeSet<(Tile, Tile)> = [(a.clone(), a.clone())].into_iter().collect();
        AmtpInstance::new(
            n,
            vec![a.clone()],
            rel.clone(),
            rel.clone(),
            [a.clone()].into_iter().collect(),
            [a.clone()].into_iter().collect(),
            rel,
        )
        .unwrap()
    }

    #[test]
    fn amtp_singleton_positive() {
        assert!(solve_amtp(&singleton_amtp(2)).unwrap());
    }

    #[test]
    fn amtp_empty_acc_negative() {
        let mut inst = singleton_amtp(2);
        inst.acc.clear();
        assert!(!solve_amtp(&inst).unwrap());
    }

    #[test]
    fn amtp_empty_t0_is_vacuously_true() {
        let mut inst = singleton_amtp(2);
        inst.t0.clear();
        assert!(solve_amtp(&inst).unwrap());
    }

    #[test]
    fn amtp_rejects_odd_n() {
        let a = "a".to_string();
        assert!(matches!(
            AmtpInstance::new(
                3,
                vec![a],
                BTreeSet::new(),
                BTreeSet::new(),
                BTreeSet::new(),
                BTreeSet::new(),
                BTreeSet::new(),
            ),
            Err(TilingError::OddN(3)),
        ));
    }

    #[test]
    fn instance_json() {
        let text = r#"{"tiles": ["a", "b"],
            "hori": [["a","b"],["b","a"]],
            "verti": [["a","b"],["b","a"]],
            "init": ["a"]}"#;
        let inst = tiling_instance_from_json(text).unwrap();
        assert_eq!(inst, checkerboard_instance());

        let amtp = r#"{"tiles": ["a"], "hori": [["a","a"]], "verti": [["a","a"]],
            "t0": ["a"], "acc": ["a"], "multi": [["a","a"]], "n": 2}"#;
        assert!(amtp_instance_from_json(amtp).is_ok());
    }
}
