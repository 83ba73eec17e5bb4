//! Inference-time composition of per-cell forecasts for arbitrary query
//! intervals, and the policy-aware forecast dispatch.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::interval::{intersecting, DiscretePartition, Interval};
use crate::matrix::Matrix;
use crate::model::{forward, Checkpoint, ModelParams};
use crate::train::{PolicyConfig, PolicyKind};

/// Below this every cell is considered to disclaim the input.
pub const MIN_CONFIDENCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Confidence-weighted average of the contributing cells.
    Average,
    /// Prediction of the most confident cell.
    MaxConfidence,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Average => "avg",
            Strategy::MaxConfidence => "max",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "avg" | "average" | "1" => Ok(Strategy::Average),
            "max" | "maxconf" | "inf" => Ok(Strategy::MaxConfidence),
            other => Err(Error::Config(format!(
                "unknown strategy {other:?} (expected avg or max)"
            ))),
        }
    }
}

/// One contributing cell's view of the input.
#[derive(Debug, Clone, PartialEq)]
pub struct CellForecast {
    pub cell: Interval,
    /// Mean of the cell-conditioned probability head.
    pub confidence: f64,
    pub prediction: Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchTrace {
    pub cells: Vec<CellForecast>,
    pub output: Matrix,
}

fn check_confidence(cells: &[CellForecast]) -> Result<()> {
    if cells.is_empty() {
        return Err(Error::InsufficientData("no contributing cells".into()));
    }
    let max = cells.iter().map(|c| c.confidence).fold(0.0, f64::max);
    if max < MIN_CONFIDENCE {
        return Err(Error::DegenerateConfidence {
            max_confidence: max,
        });
    }
    Ok(())
}

/// `sum(c_i * P_i) / sum(c_i)`.
pub fn combine_average(cells: &[CellForecast]) -> Result<Matrix> {
    check_confidence(cells)?;
    let (rows, cols) = cells[0].prediction.shape();
    let total: f64 = cells.iter().map(|c| c.confidence).sum();
    let mut out = Matrix::zeros(rows, cols);
    for c in cells {
        if c.prediction.shape() != (rows, cols) {
            return Err(Error::Dimension("cell predictions differ in shape".into()));
        }
        for (o, p) in out.as_mut_slice().iter_mut().zip(c.prediction.as_slice()) {
            *o += c.confidence * p;
        }
    }
    for o in out.as_mut_slice() {
        *o /= total;
    }
    Ok(out)
}

/// Index of the most confident cell; ties go to the cell with the smaller
/// lower bound.
pub fn select_max(cells: &[CellForecast]) -> Result<usize> {
    check_confidence(cells)?;
    let mut best = 0;
    for (i, c) in cells.iter().enumerate().skip(1) {
        let b = &cells[best];
        if c.confidence > b.confidence
            || (c.confidence == b.confidence && c.cell.lo() < b.cell.lo())
        {
            best = i;
        }
    }
    Ok(best)
}

pub fn combine(cells: &[CellForecast], strategy: Strategy) -> Result<Matrix> {
    match strategy {
        Strategy::Average => combine_average(cells),
        Strategy::MaxConfidence => Ok(cells[select_max(cells)?].prediction.clone()),
    }
}

/// Forecasts of every cell of `partition` intersecting `query`.
pub fn cell_forecasts(
    params: &ModelParams,
    history: &Matrix,
    query: &Interval,
    partition: &DiscretePartition,
) -> Result<Vec<CellForecast>> {
    intersecting(partition, query)
        .into_iter()
        .map(|cell| {
            let f = forward(params, history, &cell)?;
            Ok(CellForecast {
                cell,
                confidence: f.confidence(),
                prediction: f.regression,
            })
        })
        .collect()
}

fn patch(
    params: &ModelParams,
    history: &Matrix,
    query: &Interval,
    partition: &DiscretePartition,
    strategy: Strategy,
) -> Result<(Matrix, PatchTrace)> {
    let cells = cell_forecasts(params, history, query, partition)?;
    let output = combine(&cells, strategy)?;
    Ok((output.clone(), PatchTrace { cells, output }))
}

pub fn patch_average(
    params: &ModelParams,
    history: &Matrix,
    query: &Interval,
    partition: &DiscretePartition,
) -> Result<(Matrix, PatchTrace)> {
    patch(params, history, query, partition, Strategy::Average)
}

pub fn patch_maxconf(
    params: &ModelParams,
    history: &Matrix,
    query: &Interval,
    partition: &DiscretePartition,
) -> Result<(Matrix, PatchTrace)> {
    patch(params, history, query, partition, Strategy::MaxConfidence)
}

/// Trained parameters together with the policy that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub params: ModelParams,
    pub policy: PolicyConfig,
}

impl TrainedModel {
    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        Ok(Self {
            params: ck.params.clone(),
            policy: ck.policy.parse()?,
        })
    }

    /// Forecast for `query`:
    /// - B ignores the query and E2E accepts only its task interval; both
    ///   run with the covariate pinned to `[0, 1]`.
    /// - C conditions directly on the query.
    /// - D accepts only queries equal to one of its cells.
    /// - Dstar patches the intersecting cells with `strategy`.
    pub fn forecast(
        &self,
        history: &Matrix,
        query: &Interval,
        strategy: Strategy,
    ) -> Result<Matrix> {
        let plain = |interval: &Interval| Ok(forward(&self.params, history, interval)?.regression);
        match self.policy.kind() {
            PolicyKind::B => plain(&Interval::FULL),
            PolicyKind::E2E => {
                let task = self
                    .policy
                    .task_interval()
                    .expect("e2e carries its interval");
                if !task.approx_eq(query) {
                    return Err(Error::UnsupportedQuery {
                        query: query.to_string(),
                        reason: format!("this model was trained for {task} only"),
                    });
                }
                plain(&Interval::FULL)
            }
            PolicyKind::C => plain(query),
            PolicyKind::D => {
                let partition = self.policy.partition().expect("d carries a partition");
                match partition.cell_index(query) {
                    Some(i) => plain(&partition.cells()[i]),
                    None => Err(Error::UnsupportedQuery {
                        query: query.to_string(),
                        reason: "not a training cell; train with the dstar policy to patch arbitrary intervals"
                            .into(),
                    }),
                }
            }
            PolicyKind::Dstar => {
                let partition = self.policy.partition().expect("dstar carries a partition");
                Ok(patch(&self.params, history, query, partition, strategy)?.0)
            }
        }
    }
}

pub fn forecast(
    model: &TrainedModel,
    history: &Matrix,
    query: &Interval,
    strategy: Strategy,
) -> Result<Matrix> {
    model.forecast(history, query, strategy)
}

#[cfg(test)]
mod tests {
    use super::Strategy;
    use super::*;
    use crate::interval::DecayRate;
    use crate::model::{init, ModelKind};
    use proptest::prelude::*;

    fn scalar(cell: (f64, f64), confidence: f64, v: f64) -> CellForecast {
        CellForecast {
            cell: Interval::new(cell.0, cell.1).unwrap(),
            confidence,
            prediction: Matrix::filled(1, 1, v),
        }
    }

    #[test]
    fn single_cell_is_exact() {
        let c = vec![CellForecast {
            cell: Interval::new(0.0, 0.5).unwrap(),
            confidence: 0.3,
            prediction: Matrix::from_vec(2, 1, vec![0.1, 0.7]).unwrap(),
        }];
        assert_eq!(combine_average(&c).unwrap(), c[0].prediction);
        assert_eq!(
            combine(&c, Strategy::MaxConfidence).unwrap(),
            c[0].prediction
        );
    }

    #[test]
    fn equal_confidence_is_plain_mean() {
        let c = vec![scalar((0.0, 0.5), 0.4, 0.2), scalar((0.5, 1.0), 0.4, 0.6)];
        assert!((combine_average(&c).unwrap().get(0, 0) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn weighted_example() {
        let c = vec![scalar((0.0, 0.5), 0.9, 1.0), scalar((0.5, 1.0), 0.1, 0.0)];
        assert!((combine_average(&c).unwrap().get(0, 0) - 0.9).abs() < 1e-15);
    }

    #[test]
    fn argmax_and_tie_break() {
        let c = vec![scalar((0.0, 0.5), 0.2, 1.0), scalar((0.5, 1.0), 0.8, 2.0)];
        assert_eq!(combine(&c, Strategy::MaxConfidence).unwrap().get(0, 0), 2.0);
        let tie = vec![scalar((0.5, 1.0), 0.5, 2.0), scalar((0.0, 0.5), 0.5, 1.0)];
        assert_eq!(
            combine(&tie, Strategy::MaxConfidence).unwrap().get(0, 0),
            1.0
        );
    }

    #[test]
    fn degenerate_confidence() {
        let c = vec![scalar((0.0, 0.5), 0.0, 1.0), scalar((0.5, 1.0), 1e-13, 2.0)];
        assert!(matches!(
            combine_average(&c),
            Err(Error::DegenerateConfidence { .. })
        ));
        assert!(matches!(
            select_max(&c),
            Err(Error::DegenerateConfidence { .. })
        ));
    }

    fn dstar(cells: usize) -> TrainedModel {
        TrainedModel {
            params: init(ModelKind::Mlp { hidden: 6 }, (8, 3, 2), 4).unwrap(),
            policy: PolicyConfig::dstar(cells, DecayRate::Finite(37.0), 0.5).unwrap(),
        }
    }

    #[test]
    fn dispatch_counts_cells() {
        let m = dstar(8);
        let h = Matrix::filled(8, 2, 0.4);
        let p = m.policy.partition().unwrap();
        let (_, trace) =
            patch_average(&m.params, &h, &Interval::new(0.75, 1.0).unwrap(), p).unwrap();
        assert_eq!(trace.cells.len(), 2);
        let (_, trace) = patch_maxconf(&m.params, &h, &Interval::FULL, p).unwrap();
        assert_eq!(trace.cells.len(), 8);
    }

    #[test]
    fn d_rejects_non_cell_queries() {
        let m = TrainedModel {
            params: init(ModelKind::linear(), (8, 3, 1), 0).unwrap(),
            policy: PolicyConfig::discrete(4).unwrap(),
        };
        let h = Matrix::filled(8, 1, 0.4);
        assert!(m
            .forecast(&h, &Interval::new(0.25, 0.5).unwrap(), Strategy::Average)
            .is_ok());
        assert!(matches!(
            m.forecast(&h, &Interval::new(0.2, 0.5).unwrap(), Strategy::Average),
            Err(Error::UnsupportedQuery { .. })
        ));
    }

    #[test]
    fn e2e_rejects_other_intervals() {
        let task = Interval::new(0.75, 1.0).unwrap();
        let m = TrainedModel {
            params: init(ModelKind::linear(), (8, 3, 1), 0).unwrap(),
            policy: PolicyConfig::e2e(task),
        };
        let h = Matrix::filled(8, 1, 0.4);
        assert!(m.forecast(&h, &task, Strategy::Average).is_ok());
        assert!(m.forecast(&h, &Interval::FULL, Strategy::Average).is_err());
    }

    #[test]
    fn baseline_ignores_query() {
        let m = TrainedModel {
            params: init(ModelKind::mlp(), (8, 3, 1), 0).unwrap(),
            policy: PolicyConfig::baseline(),
        };
        let h = Matrix::filled(8, 1, 0.4);
        let a = m
            .forecast(&h, &Interval::new(0.0, 0.1).unwrap(), Strategy::Average)
            .unwrap();
        let b = m
            .forecast(&h, &Interval::new(0.6, 0.9).unwrap(), Strategy::Average)
            .unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn average_stays_in_envelope_and_ignores_order(
            preds in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 4), 1..6),
            conf in prop::collection::vec(0.01f64..1.0, 6),
            rot in 0usize..6,
        ) {
            let cells: Vec<CellForecast> = preds.iter().enumerate().map(|(i, p)| CellForecast {
                cell: Interval::new(i as f64 / 6.0, (i + 1) as f64 / 6.0).unwrap(),
                confidence: conf[i],
                prediction: Matrix::from_vec(2, 2, p.clone()).unwrap(),
            }).collect();
            let avg = combine_average(&cells).unwrap();
            for e in 0..4 {
                let lo = preds.iter().map(|p| p[e]).fold(f64::INFINITY, f64::min);
                let hi = preds.iter().map(|p| p[e]).fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(avg.as_slice()[e] >= lo - 1e-12 && avg.as_slice()[e] <= hi + 1e-12);
            }
            let mut shuffled = cells.clone();
            shuffled.rotate_left(rot % cells.len());
            shuffled.reverse();
            let again = combine_average(&shuffled).unwrap();
            prop_assert!(avg.max_abs_diff(&again).unwrap() <= 1e-12);
            let best = combine(&cells, Strategy::MaxConfidence).unwrap();
            let best_again = combine(&shuffled, Strategy::MaxConfidence).unwrap();
            prop_assert_eq!(&best, &best_again);
            prop_assert!(cells.iter().any(|c| c.prediction == best));
        }

        #[test]
        fn confidence_ignores_entry_order(
            probs in prop::collection::vec(0.01f64..0.99, 6),
            shift in 0usize..6,
        ) {
            let mut rotated = probs.clone();
            rotated.rotate_left(shift);
            let a = Matrix::from_vec(3, 2, probs).unwrap().mean();
            let b = Matrix::from_vec(3, 2, rotated).unwrap().mean();
            prop_assert!((a - b).abs() <= 1e-15);
        }
    }
}
