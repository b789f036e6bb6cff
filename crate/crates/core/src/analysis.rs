//! Exploration of the strategy space: payoff surfaces over the two swept
//! converter families, best responses and equilibrium classification.

use std::f64::consts::PI;

use serde::Serialize;

use crate::game::{classical_mixed, Backend, NamedStrategy, PayoffTable, Protocol, Strategy};
use crate::optics::ConverterParams;
use crate::{Error, Result};

/// Default number of grid points per swept segment.
pub const DEFAULT_RESOLUTION: usize = 101;

/// Tolerance for "gains by deviating" and payoff ties.
pub const EQUILIBRIUM_TOL: f64 = 1e-9;

const TIE_TOL: f64 = 1e-12;

/// Position `t ∈ [−1, 1]` on the fused family: `t ≥ 0` is `C(0°, tπ)`
/// (identity to `iZ`), `t < 0` is `C(45°, |t|π)` (identity to `iX`).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct StrategyParam(f64);

impl StrategyParam {
    pub fn new(t: f64) -> Result<Self> {
        if !(t.abs() <= 1.0) {
            return Err(Error::Config(format!("strategy parameter {t} outside [-1, 1]")));
        }
        Ok(StrategyParam(t))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn params(self) -> ConverterParams {
        let t = self.0;
        if t >= 0.0 {
            ConverterParams { theta_deg: 0.0, phi_rad: t * PI }
        } else {
            ConverterParams { theta_deg: 45.0, phi_rad: -t * PI }
        }
    }

    /// The move at `t`; the five named strategies sit at `t ∈ {−1, −½, 0, ½, 1}`.
    pub fn strategy(self) -> Strategy {
        let params = self.params();
        NamedStrategy::ALL
            .iter()
            .find(|n| n.params() == params)
            .map_or(Strategy::Converter(params), |&n| Strategy::Named(n))
    }
}

/// The `2n − 1` values of `t` with `n` points on each segment; the segments
/// share `t = 0`.
pub fn fused_grid(n_per_segment: usize) -> Result<Vec<StrategyParam>> {
    if n_per_segment < 2 {
        return Err(Error::InvalidGrid { got: n_per_segment, min: 2 });
    }
    let half = (n_per_segment - 1) as f64;
    Ok((0..2 * n_per_segment - 1).map(|k| StrategyParam((k as f64 - half) / half)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfacePoint {
    pub t_a: StrategyParam,
    pub t_b: StrategyParam,
    pub payoff_a: f64,
    pub payoff_b: f64,
}

/// Payoffs over the full fused grid, ordered with `t_a` as the outer index.
pub fn sweep(n_per_segment: usize, backend: Backend, table: &PayoffTable) -> Result<Vec<SurfacePoint>> {
    let grid = fused_grid(n_per_segment)?;
    let protocol = Protocol::cached(backend)?;
    let elements: Vec<_> = grid.iter().map(|t| t.strategy().element()).collect();
    let mut points = Vec::with_capacity(grid.len() * grid.len());
    for (ta, ea) in grid.iter().zip(&elements) {
        for (tb, eb) in grid.iter().zip(&elements) {
            let o = protocol.play_elements(ea, eb, table);
            points.push(SurfacePoint { t_a: *ta, t_b: *tb, payoff_a: o.payoff_a, payoff_b: o.payoff_b });
        }
    }
    Ok(points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Player {
    Alice,
    Bob,
}

/// Alice's best reply to `opponent` over the fused family.
pub fn best_response(
    opponent: &Strategy,
    n_per_segment: usize,
    backend: Backend,
    table: &PayoffTable,
) -> Result<(StrategyParam, f64)> {
    best_response_for(Player::Alice, opponent, n_per_segment, backend, table)
}

/// Best reply of `player` to a fixed `opponent` move.
///
/// Ties within 1e−12 go to the smallest `|t|`, then to `t ≥ 0`.
pub fn best_response_for(
    player: Player,
    opponent: &Strategy,
    n_per_segment: usize,
    backend: Backend,
    table: &PayoffTable,
) -> Result<(StrategyParam, f64)> {
    if n_per_segment < 3 {
        return Err(Error::InvalidGrid { got: n_per_segment, min: 3 });
    }
    let protocol = Protocol::cached(backend)?;
    let opp = opponent.element();
    let mut candidates = fused_grid(n_per_segment)?;
    candidates.sort_by(|x, y| {
        x.0.abs().total_cmp(&y.0.abs()).then_with(|| (x.0 < 0.0).cmp(&(y.0 < 0.0)))
    });
    let mut best: Option<(StrategyParam, f64)> = None;
    for t in candidates {
        let mine = t.strategy().element();
        let value = match player {
            Player::Alice => protocol.play_elements(&mine, &opp, table).payoff_a,
            Player::Bob => protocol.play_elements(&opp, &mine, table).payoff_b,
        };
        if best.is_none_or(|(_, b)| value > b + TIE_TOL) {
            best = Some((t, value));
        }
    }
    Ok(best.expect("grid is nonempty"))
}

/// Equilibrium analysis of a finite strategy set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub strategies: Vec<Strategy>,
    /// `payoffs[i][j]` for Alice playing `strategies[i]`, Bob `strategies[j]`.
    pub payoffs: Vec<Vec<(f64, f64)>>,
    /// Pure Nash equilibria as `(alice index, bob index)`.
    pub equilibria: Vec<(usize, usize)>,
    /// Pairs whose payoffs are Pareto-dominated by the `(iZ, iZ)` outcome.
    pub dominated_pairs: Vec<(usize, usize)>,
    /// Pairs whose outcome no other pair in the set Pareto-improves.
    pub pareto_front: Vec<(usize, usize)>,
}

impl EquilibriumReport {
    /// Largest gain either player can get by deviating unilaterally within
    /// the set.
    pub fn deviation_gain(&self, i: usize, j: usize) -> f64 {
        let (pa, pb) = self.payoffs[i][j];
        let alice = self.payoffs.iter().map(|row| row[j].0 - pa).fold(f64::NEG_INFINITY, f64::max);
        let bob = self.payoffs[i].iter().map(|p| p.1 - pb).fold(f64::NEG_INFINITY, f64::max);
        alice.max(bob)
    }

    pub fn is_equilibrium(&self, i: usize, j: usize) -> bool {
        self.equilibria.contains(&(i, j))
    }

    pub fn index_of(&self, s: &Strategy) -> Option<usize> {
        self.strategies.iter().position(|x| x == s)
    }

    pub fn is_pareto(&self, i: usize, j: usize) -> bool {
        self.pareto_front.contains(&(i, j))
    }
}

fn dominates(x: (f64, f64), y: (f64, f64)) -> bool {
    x.0 >= y.0 - EQUILIBRIUM_TOL
        && x.1 >= y.1 - EQUILIBRIUM_TOL
        && (x.0 > y.0 + EQUILIBRIUM_TOL || x.1 > y.1 + EQUILIBRIUM_TOL)
}

/// Exhaustive pure-strategy equilibrium check over `set × set`.
pub fn nash_discrete(set: &[Strategy], backend: Backend, table: &PayoffTable) -> Result<EquilibriumReport> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let protocol = Protocol::cached(backend)?;
    let payoffs: Vec<Vec<(f64, f64)>> =
        set.iter().map(|a| set.iter().map(|b| protocol.play(a, b, table).payoffs()).collect()).collect();
    let reference = protocol.play(&Strategy::IZ, &Strategy::IZ, table).payoffs();

    let mut report = EquilibriumReport {
        strategies: set.to_vec(),
        payoffs,
        equilibria: Vec::new(),
        dominated_pairs: Vec::new(),
        pareto_front: Vec::new(),
    };
    let n = set.len();
    let all: Vec<(f64, f64)> = report.payoffs.iter().flatten().copied().collect();
    for i in 0..n {
        for j in 0..n {
            let here = report.payoffs[i][j];
            if report.deviation_gain(i, j) <= EQUILIBRIUM_TOL {
                report.equilibria.push((i, j));
            }
            if dominates(reference, here) {
                report.dominated_pairs.push((i, j));
            }
            if !all.iter().any(|&other| dominates(other, here)) {
                report.pareto_front.push((i, j));
            }
        }
    }
    Ok(report)
}

/// Mutual best responses of the classical mixed game on a `grid × grid`
/// lattice of defection probabilities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalCheck {
    /// `(p_A(D), p_B(D))` for every mutual best response on the lattice.
    pub equilibria: Vec<(f64, f64)>,
    /// Payoffs at the first located equilibrium.
    pub payoffs: (f64, f64),
    /// True iff the only equilibrium is all-defect `(1, 1)`.
    pub unique_all_defect: bool,
}

pub fn classical_minimum_check(grid: usize, table: &PayoffTable) -> Result<ClassicalCheck> {
    if grid < 2 {
        return Err(Error::InvalidGrid { got: grid, min: 2 });
    }
    let probs: Vec<f64> = (0..grid).map(|k| k as f64 / (grid - 1) as f64).collect();
    let values: Vec<Vec<(f64, f64)>> =
        probs.iter().map(|&pa| probs.iter().map(|&pb| classical_mixed(pa, pb, table)).collect()).collect();
    // Best value Alice can get against each pb, and Bob against each pa.
    let alice_best: Vec<f64> =
        (0..grid).map(|j| (0..grid).map(|i| values[i][j].0).fold(f64::NEG_INFINITY, f64::max)).collect();
    let bob_best: Vec<f64> =
        (0..grid).map(|i| (0..grid).map(|j| values[i][j].1).fold(f64::NEG_INFINITY, f64::max)).collect();

    let mut equilibria = Vec::new();
    let mut first = None;
    for i in 0..grid {
        for j in 0..grid {
            let (va, vb) = values[i][j];
            if va >= alice_best[j] - TIE_TOL && vb >= bob_best[i] - TIE_TOL {
                equilibria.push((probs[i], probs[j]));
                first.get_or_insert((va, vb));
            }
        }
    }
    let unique_all_defect = equilibria == [(1.0, 1.0)];
    Ok(ClassicalCheck { equilibria, payoffs: first.unwrap_or((f64::NAN, f64::NAN)), unique_all_defect })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::run_protocol;

    fn table() -> PayoffTable {
        PayoffTable::default()
    }

    fn at(points: &[SurfacePoint], ta: f64, tb: f64) -> SurfacePoint {
        *points.iter().find(|p| p.t_a.value() == ta && p.t_b.value() == tb).unwrap()
    }

    #[test]
    fn fused_grid_layout() {
        let g: Vec<f64> = fused_grid(2).unwrap().into_iter().map(StrategyParam::value).collect();
        assert_eq!(g, [-1.0, 0.0, 1.0]);
        let g = fused_grid(101).unwrap();
        assert_eq!(g.len(), 201);
        assert_eq!(g[100].value(), 0.0);
        assert!(fused_grid(1).is_err());
    }

    #[test]
    fn named_anchor_points() {
        let s = |t: f64| StrategyParam::new(t).unwrap().strategy();
        assert_eq!(s(-1.0), Strategy::IX);
        assert_eq!(s(-0.5), Strategy::Q1);
        assert_eq!(s(0.0), Strategy::I);
        assert_eq!(s(0.5), Strategy::Q2);
        assert_eq!(s(1.0), Strategy::IZ);
        assert!(matches!(s(0.3), Strategy::Converter(_)));
    }

    #[test]
    fn param_endpoints_are_named_strategies() {
        let p = |t: f64| StrategyParam::new(t).unwrap().strategy().element();
        assert!(p(1.0).max_diff(&Strategy::IZ.element()) < 1e-15);
        assert!(p(-1.0).max_diff(&Strategy::IX.element()) < 1e-15);
        assert!(p(0.0).max_diff(&Strategy::I.element()) < 1e-15);
        assert!(p(-1e-12).max_diff(&Strategy::I.element()) < 1e-11);
        assert!(StrategyParam::new(1.5).is_err());
        assert!(StrategyParam::new(f64::NAN).is_err());
    }

    #[test]
    fn sweep_corners() {
        let pts = sweep(5, Backend::Abstract, &table()).unwrap();
        assert_eq!(pts.len(), 81);
        assert!((at(&pts, 1.0, 1.0).payoff_a - 3.0).abs() < 1e-12);
        assert!((at(&pts, -1.0, -1.0).payoff_a - 1.0).abs() < 1e-12);
        assert!((at(&pts, 1.0, -1.0).payoff_a - 5.0).abs() < 1e-12);
        assert!((at(&pts, -1.0, 1.0).payoff_a - 0.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_matches_fresh_evaluation_and_is_symmetric() {
        let pts = sweep(6, Backend::Abstract, &table()).unwrap();
        for p in &pts {
            let o = run_protocol(&p.t_a.strategy(), &p.t_b.strategy(), Backend::Abstract, &table()).unwrap();
            assert!((o.payoff_a - p.payoff_a).abs() < 1e-12);
            assert!((o.payoff_b - p.payoff_b).abs() < 1e-12);
            let mirror = at(&pts, p.t_b.value(), p.t_a.value());
            assert!((p.payoff_a - mirror.payoff_b).abs() < 1e-12);
        }
    }

    fn max_adjacent_jump(n: usize) -> f64 {
        let pts = sweep(n, Backend::Abstract, &table()).unwrap();
        let side = 2 * n - 1;
        let mut worst: f64 = 0.0;
        for i in 0..side {
            for j in 0..side {
                let here = pts[i * side + j].payoff_a;
                if j + 1 < side {
                    worst = worst.max((pts[i * side + j + 1].payoff_a - here).abs());
                }
                if i + 1 < side {
                    worst = worst.max((pts[(i + 1) * side + j].payoff_a - here).abs());
                }
            }
        }
        worst
    }

    #[test]
    fn surface_is_continuous() {
        let coarse = max_adjacent_jump(11);
        let fine = max_adjacent_jump(21);
        assert!(fine < coarse);
        let ratio = coarse / fine;
        assert!(ratio > 2.0 / 4.0 && ratio < 2.0 * 4.0, "ratio {ratio}");
    }

    #[test]
    fn best_response_examples() {
        let (t, v) = best_response(&Strategy::IZ, 101, Backend::Abstract, &table()).unwrap();
        assert_eq!(t.value(), 1.0);
        assert!((v - 3.0).abs() < 1e-12);
        let (t, v) = best_response(&Strategy::IX, 101, Backend::Abstract, &table()).unwrap();
        assert_eq!(t.value(), 1.0);
        assert!((v - 5.0).abs() < 1e-12);
        let (t, v) = best_response(&Strategy::I, 101, Backend::Abstract, &table()).unwrap();
        assert_eq!(t.value(), -1.0);
        assert!((v - 5.0).abs() < 1e-12);
        assert!(best_response(&Strategy::I, 2, Backend::Abstract, &table()).is_err());
    }

    #[test]
    fn best_response_matches_brute_force() {
        // Oracle: scan every grid point with fresh protocol runs.
        for opp in Strategy::named() {
            let (_, v) = best_response(&opp, 21, Backend::Abstract, &table()).unwrap();
            let brute = fused_grid(21)
                .unwrap()
                .iter()
                .map(|t| run_protocol(&t.strategy(), &opp, Backend::Abstract, &table()).unwrap().payoff_a)
                .fold(f64::NEG_INFINITY, f64::max);
            assert!((v - brute).abs() < 1e-12);
        }
    }

    #[test]
    fn bob_best_response_mirrors_alice() {
        let (t, v) = best_response_for(Player::Bob, &Strategy::I, 101, Backend::Abstract, &table()).unwrap();
        assert_eq!(t.value(), -1.0);
        assert!((v - 5.0).abs() < 1e-12);
    }

    #[test]
    fn classical_subset_equilibrium() {
        let set = [Strategy::I, Strategy::IX];
        let r = nash_discrete(&set, Backend::Abstract, &table()).unwrap();
        assert_eq!(r.equilibria, vec![(1, 1)]);
        // (I, I) is dominated by the (iZ, iZ) outcome? No: both are (3, 3).
        assert!(!r.dominated_pairs.contains(&(0, 0)));
        assert!(r.dominated_pairs.contains(&(1, 1)));
    }

    #[test]
    fn quantum_set_equilibria() {
        let set = Strategy::named();
        let r = nash_discrete(&set, Backend::Abstract, &table()).unwrap();
        let iz = r.index_of(&Strategy::IZ).unwrap();
        let ix = r.index_of(&Strategy::IX).unwrap();
        assert!(r.is_equilibrium(iz, iz));
        assert!(!r.is_equilibrium(ix, ix));
        assert!((r.payoffs[iz][ix].0 - 5.0).abs() < 1e-12);
        for &(i, j) in &r.equilibria {
            assert!(r.deviation_gain(i, j) <= EQUILIBRIUM_TOL);
        }
        // Every (3, 3) outcome is Pareto optimal.
        for i in 0..5 {
            for j in 0..5 {
                let (a, b) = r.payoffs[i][j];
                if (a - 3.0).abs() < 1e-9 && (b - 3.0).abs() < 1e-9 {
                    assert!(r.is_pareto(i, j));
                }
            }
        }
        assert!(nash_discrete(&[], Backend::Abstract, &table()).is_err());
    }

    #[test]
    fn classical_minimum() {
        for grid in [11, 101] {
            let c = classical_minimum_check(grid, &table()).unwrap();
            assert!(c.unique_all_defect);
            assert_eq!(c.equilibria, vec![(1.0, 1.0)]);
            assert_eq!(c.payoffs, (1.0, 1.0));
        }
    }

    #[test]
    fn classical_minimum_moves_with_table() {
        let t = table().apply_override("DD=0,0").unwrap();
        let c = classical_minimum_check(11, &t).unwrap();
        assert!(!c.unique_all_defect);
        // Brute force: with DD worth nothing, any profile where one side
        // defects surely leaves the other indifferent.
        let mut brute = Vec::new();
        for i in 0..11 {
            for j in 0..11 {
                let (pa, pb) = (i as f64 / 10.0, j as f64 / 10.0);
                let va = classical_mixed(pa, pb, &t).0;
                let vb = classical_mixed(pa, pb, &t).1;
                let a_ok = (0..11).all(|k| classical_mixed(k as f64 / 10.0, pb, &t).0 <= va + 1e-12);
                let b_ok = (0..11).all(|k| classical_mixed(pa, k as f64 / 10.0, &t).1 <= vb + 1e-12);
                if a_ok && b_ok {
                    brute.push((pa, pb));
                }
            }
        }
        assert_eq!(c.equilibria, brute);
        assert!(c.equilibria.len() > 1);
    }
}
