//! Instance-level average precision over point masks.
//!
//! Predictions are matched greedily in confidence order (ties: larger mask,
//! then lower input index) to the unmatched ground truth of highest IoU at
//! or above the threshold. AP is the area under the all-point interpolated
//! precision envelope. Thresholds are integer hundredths and compared
//! exactly: `intersection * 100 >= t * union`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::write_json;

/// 0.50, 0.55, ..., 0.95
pub const AP_THRESHOLDS: [u32; 10] = [50, 55, 60, 65, 70, 75, 80, 85, 90, 95];

/// `|a ∩ b| / |a ∪ b|`; two empty masks give 0.
pub fn point_iou(a: &[bool], b: &[bool]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    let inter = a.iter().zip(b).filter(|(x, y)| **x && **y).count();
    let union = a.iter().zip(b).filter(|(x, y)| **x || **y).count();
    if union == 0 {
        log::warn!("IoU of two empty masks taken as 0");
        return Ok(0.0);
    }
    Ok(inter as f64 / union as f64)
}

/// Intersection and union sizes of two ascending index lists.
pub fn overlap(a: &[u32], b: &[u32]) -> (u64, u64) {
    let (mut i, mut j, mut inter) = (0, 0, 0u64);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    (inter, a.len() as u64 + b.len() as u64 - inter)
}

/// A prediction: confidence and ascending point indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredMask {
    pub confidence: f64,
    pub points: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Ratio {
    num: u64,
    den: u64,
}

impl Ratio {
    fn meets(self, hundredths: u32) -> bool {
        self.den > 0 && self.num as u128 * 100 >= hundredths as u128 * self.den as u128
    }

    fn cmp(self, other: Ratio) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

/// Rank order of predictions.
pub fn ranking(preds: &[ScoredMask]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| {
        preds[b]
            .confidence
            .total_cmp(&preds[a].confidence)
            .then(preds[b].points.len().cmp(&preds[a].points.len()))
            .then(a.cmp(&b))
    });
    order
}

struct Matcher {
    order: Vec<usize>,
    ious: Vec<Vec<Ratio>>,
    gts: usize,
}

impl Matcher {
    fn new(preds: &[ScoredMask], gts: &[Vec<u32>]) -> Self {
        let ious = preds
            .iter()
            .map(|p| {
                gts.iter()
                    .map(|g| {
                        let (num, den) = overlap(&p.points, g);
                        Ratio { num, den }
                    })
                    .collect()
            })
            .collect();
        Matcher {
            order: ranking(preds),
            ious,
            gts: gts.len(),
        }
    }

    /// True-positive flag per ranked prediction.
    fn matches(&self, hundredths: u32) -> Vec<bool> {
        let mut taken = vec![false; self.gts];
        self.order
            .iter()
            .map(|&p| {
                let mut best: Option<usize> = None;
                for g in 0..self.gts {
                    let r = self.ious[p][g];
                    if taken[g] || !r.meets(hundredths) {
                        continue;
                    }
                    if best.is_none_or(|b| r.cmp(self.ious[p][b]) == Ordering::Greater) {
                        best = Some(g);
                    }
                }
                if let Some(g) = best {
                    taken[g] = true;
                }
                best.is_some()
            })
            .collect()
    }
}

/// `(recall, precision)` after each ranked prediction.
pub fn pr_curve(tp: &[bool], gts: usize) -> Vec<[f64; 2]> {
    let mut hits = 0usize;
    tp.iter()
        .enumerate()
        .map(|(k, &t)| {
            hits += t as usize;
            let recall = if gts == 0 { 0.0 } else { hits as f64 / gts as f64 };
            [recall, hits as f64 / (k + 1) as f64]
        })
        .collect()
}

/// Area under the precision envelope of a ranked true-positive sequence.
pub fn ap_from_matches(tp: &[bool], gts: usize) -> f64 {
    if gts == 0 {
        return 0.0;
    }
    let curve = pr_curve(tp, gts);
    let mut envelope = vec![0.0f64; curve.len()];
    let mut best = 0.0f64;
    for k in (0..curve.len()).rev() {
        best = best.max(curve[k][1]);
        envelope[k] = best;
    }
    let mut ap = 0.0;
    let mut prev = 0.0;
    for k in 0..curve.len() {
        if tp[k] {
            ap += (curve[k][0] - prev) * envelope[k];
            prev = curve[k][0];
        }
    }
    ap
}

pub fn average_precision(preds: &[ScoredMask], gts: &[Vec<u32>], hundredths: u32) -> f64 {
    let m = Matcher::new(preds, gts);
    ap_from_matches(&m.matches(hundredths), gts.len())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub threshold: f64,
    pub ap: f64,
    pub matches: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryReport {
    pub query: String,
    pub predictions: usize,
    pub ground_truths: usize,
    pub ap: f64,
    pub ap50: f64,
    pub ap25: f64,
    /// 0.25 followed by 0.50..0.95
    pub thresholds: Vec<ThresholdResult>,
    /// `(recall, precision)` per ranked prediction at IoU 0.50
    pub pr50: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub queries: Vec<QueryReport>,
    /// number of queries with at least one ground truth
    pub evaluated_queries: usize,
    pub ap: f64,
    pub ap50: f64,
    pub ap25: f64,
}

pub fn evaluate_query(query: &str, preds: &[ScoredMask], gts: &[Vec<u32>]) -> QueryReport {
    let m = Matcher::new(preds, gts);
    let mut thresholds = Vec::with_capacity(AP_THRESHOLDS.len() + 1);
    let mut pr50 = Vec::new();
    for t in std::iter::once(25).chain(AP_THRESHOLDS) {
        let tp = m.matches(t);
        if t == 50 {
            pr50 = pr_curve(&tp, gts.len());
        }
        thresholds.push(ThresholdResult {
            threshold: t as f64 / 100.0,
            ap: ap_from_matches(&tp, gts.len()),
            matches: tp.iter().filter(|&&x| x).count(),
        });
    }
    let ap = thresholds[1..].iter().map(|r| r.ap).sum::<f64>() / AP_THRESHOLDS.len() as f64;
    QueryReport {
        query: query.to_string(),
        predictions: preds.len(),
        ground_truths: gts.len(),
        ap,
        ap50: thresholds[1].ap,
        ap25: thresholds[0].ap,
        thresholds,
        pr50,
    }
}

/// Evaluates every ground-truth query; missing predictions count as none.
/// Predictions for a query absent from `gts` are an error.
pub fn evaluate(preds: &BTreeMap<String, Vec<ScoredMask>>, gts: &BTreeMap<String, Vec<Vec<u32>>>) -> Result<EvalReport> {
    if let Some(q) = preds.keys().find(|q| !gts.contains_key(*q)) {
        return Err(Error::UnknownQuery(q.clone()));
    }
    let queries: Vec<QueryReport> = gts
        .iter()
        .map(|(q, g)| evaluate_query(q, preds.get(q).map(Vec::as_slice).unwrap_or(&[]), g))
        .collect();
    Ok(aggregate(queries))
}

/// Unweighted means over the queries that have ground truth.
pub fn aggregate(queries: Vec<QueryReport>) -> EvalReport {
    let scored: Vec<&QueryReport> = queries.iter().filter(|q| q.ground_truths > 0).collect();
    let mean = |f: fn(&QueryReport) -> f64| {
        if scored.is_empty() {
            0.0
        } else {
            scored.iter().map(|q| f(q)).sum::<f64>() / scored.len() as f64
        }
    };
    EvalReport {
        evaluated_queries: scored.len(),
        ap: mean(|q| q.ap),
        ap50: mean(|q| q.ap50),
        ap25: mean(|q| q.ap25),
        queries,
    }
}

/// Writes `eval.json` (full report) and `eval.csv`
/// (`query,predictions,ground_truths,ap,ap50,ap25`, one row per query).
pub fn write_report(dir: &Path, report: &EvalReport) -> Result<()> {
    write_json(&dir.join("eval.json"), report)?;
    let path = dir.join("eval.csv");
    let mut f = std::io::BufWriter::new(std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?);
    let mut body = String::from("query,predictions,ground_truths,ap,ap50,ap25\n");
    for q in &report.queries {
        body.push_str(&format!(
            "{},{},{},{:.6},{:.6},{:.6}\n",
            csv_field(&q.query),
            q.predictions,
            q.ground_truths,
            q.ap,
            q.ap50,
            q.ap25
        ));
    }
    f.write_all(body.as_bytes()).and_then(|_| f.flush()).map_err(|e| Error::io(&path, e))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mask(r: std::ops::Range<u32>) -> Vec<u32> {
        r.collect()
    }

    fn pred(confidence: f64, points: Vec<u32>) -> ScoredMask {
        ScoredMask { confidence, points }
    }

    #[test]
    fn iou_closed_forms() {
        let a: Vec<bool> = (0..200).map(|i| i < 100).collect();
        let b: Vec<bool> = (0..200).map(|i| (40..140).contains(&i)).collect();
        assert_eq!(point_iou(&a, &a).unwrap(), 1.0);
        assert!((point_iou(&a, &b).unwrap() - 60.0 / 140.0).abs() < 1e-15);
        let c: Vec<bool> = (0..200).map(|i| i >= 150).collect();
        assert_eq!(point_iou(&a, &c).unwrap(), 0.0);
        assert_eq!(point_iou(&[false; 3], &[false; 3]).unwrap(), 0.0);
        assert!(matches!(point_iou(&a, &a[..5]), Err(Error::LengthMismatch(200, 5))));
        assert_eq!(overlap(&mask(0..100), &mask(40..140)), (60, 140));
    }

    #[test]
    fn single_pair_at_iou_point_six() {
        let gt = vec![mask(0..100)];
        let p = vec![pred(0.7, mask(0..60))];
        assert_eq!(average_precision(&p, &gt, 50), 1.0);
        assert_eq!(average_precision(&p, &gt, 60), 1.0);
        assert_eq!(average_precision(&p, &gt, 70), 0.0);
        let r = evaluate_query("q", &p, &gt);
        assert_eq!((r.ap50, r.ap25), (1.0, 1.0));
        assert!((r.ap - 0.3).abs() < 1e-12);
    }

    #[test]
    fn confident_miss_then_hit() {
        let gt = vec![mask(0..100)];
        // IoU 0.3 and 0.9
        let p = vec![pred(0.9, mask(70..100)), pred(0.8, mask(0..90))];
        assert_eq!(average_precision(&p, &gt, 50), 0.5);
        let r = evaluate_query("q", &p, &gt);
        assert_eq!(r.pr50, vec![[0.0, 0.0], [1.0, 0.5]]);
    }

    #[test]
    fn empty_and_unknown_queries() {
        let gts = BTreeMap::from([("a".to_string(), vec![mask(0..10)]), ("b".to_string(), vec![])]);
        let preds = BTreeMap::from([("b".to_string(), vec![pred(0.5, mask(0..3))])]);
        let r = evaluate(&preds, &gts).unwrap();
        assert_eq!(r.evaluated_queries, 1);
        assert_eq!((r.ap, r.ap50, r.ap25), (0.0, 0.0, 0.0));
        assert_eq!(r.queries[1].predictions, 1);

        let preds = BTreeMap::from([("c".to_string(), vec![])]);
        assert!(matches!(evaluate(&preds, &gts), Err(Error::UnknownQuery(q)) if q == "c"));
    }

    #[test]
    fn ground_truth_as_prediction_is_perfect() {
        let g = vec![mask(0..10), mask(10..30), mask(50..51)];
        let p: Vec<ScoredMask> = g.iter().map(|m| pred(1.0, m.clone())).collect();
        let r = evaluate_query("q", &p, &g);
        assert_eq!((r.ap, r.ap50, r.ap25), (1.0, 1.0, 1.0));
    }

    #[test]
    fn report_files() {
        let dir = tempfile::tempdir().unwrap();
        let gts = BTreeMap::from([("open, the door".to_string(), vec![mask(0..10)])]);
        let r = evaluate(&BTreeMap::new(), &gts).unwrap();
        write_report(dir.path(), &r).unwrap();
        let csv = std::fs::read_to_string(dir.path().join("eval.csv")).unwrap();
        assert_eq!(
            csv,
            "query,predictions,ground_truths,ap,ap50,ap25\n\"open, the door\",0,1,0.000000,0.000000,0.000000\n"
        );
        let back: EvalReport = crate::io::read_json(&dir.path().join("eval.json")).unwrap();
        assert_eq!(back, r);
    }

    /// Exhaustive reference: among all matchings in which each prediction,
    /// taken in rank order, either takes an eligible unmatched ground truth
    /// or has none left, pick the one whose per-prediction IoU sequence is
    /// lexicographically largest (ties to lower ground-truth index). AP is
    /// then the sum over recall steps of the best precision at or beyond
    /// that recall.
    fn oracle_ap(preds: &[ScoredMask], gts: &[Vec<u32>], t: u32) -> f64 {
        let order = ranking(preds);
        let iou = |p: usize, g: usize| {
            let (i, u) = overlap(&preds[p].points, &gts[g]);
            (i, u)
        };
        let eligible = |p: usize, g: usize| {
            let (i, u) = iou(p, g);
            u > 0 && i * 100 >= t as u64 * u
        };
        type Key = Vec<(u64, u64, i64)>;
        fn better(a: &Key, b: &Key) -> bool {
            for (x, y) in a.iter().zip(b) {
                let l = x.0 as u128 * y.1.max(1) as u128;
                let r = y.0 as u128 * x.1.max(1) as u128;
                if l != r {
                    return l > r;
                }
                if x.2 != y.2 {
                    return x.2 > y.2;
                }
            }
            false
        }
        let mut best: Option<(Key, Vec<bool>)> = None;
        let mut stack: Vec<(usize, Vec<bool>, Key, Vec<bool>)> = vec![(0, vec![false; gts.len()], vec![], vec![])];
        while let Some((k, taken, key, tp)) = stack.pop() {
            if k == order.len() {
                if best.as_ref().is_none_or(|(b, _)| better(&key, b)) {
                    best = Some((key, tp));
                }
                continue;
            }
            let p = order[k];
            let options: Vec<usize> = (0..gts.len()).filter(|&g| !taken[g] && eligible(p, g)).collect();
            if options.is_empty() {
                let mut key = key.clone();
                key.push((0, 1, i64::MIN));
                let mut tp = tp.clone();
                tp.push(false);
                stack.push((k + 1, taken.clone(), key, tp));
            }
            for g in options {
                let (i, u) = iou(p, g);
                let mut taken = taken.clone();
                taken[g] = true;
                let mut key = key.clone();
                key.push((i, u, -(g as i64)));
                let mut tp = tp.clone();
                tp.push(true);
                stack.push((k + 1, taken.clone(), key, tp));
            }
        }
        let tp = best.map(|b| b.1).unwrap_or_default();
        if gts.is_empty() {
            return 0.0;
        }
        let n = gts.len() as f64;
        let mut points = Vec::new();
        let mut hits = 0;
        for (k, &t) in tp.iter().enumerate() {
            hits += t as usize;
            points.push((hits as f64 / n, hits as f64 / (k + 1) as f64, t));
        }
        let mut ap = 0.0;
        let mut last = 0.0;
        for (r, _, t) in points.iter().copied() {
            if !t {
                continue;
            }
            let p = points.iter().filter(|q| q.0 >= r).map(|q| q.1).fold(0.0, f64::max);
            ap += (r - last) * p;
            last = r;
        }
        ap
    }

    fn random_case() -> impl Strategy<Value = (Vec<ScoredMask>, Vec<Vec<u32>>)> {
        let m = prop::collection::btree_set(0u32..24, 0..14).prop_map(|s| s.into_iter().collect::<Vec<u32>>());
        let gts = prop::collection::vec(m.clone().prop_filter("non-empty", |v| !v.is_empty()), 0..=4);
        let preds = prop::collection::vec(
            ((0u32..5).prop_map(|c| c as f64 / 4.0), m).prop_map(|(confidence, points)| ScoredMask { confidence, points }),
            0..=4,
        );
        (preds, gts)
    }

    #[test]
    fn greedy_matches_exhaustive_oracle_on_random_cases() {
        use proptest::strategy::ValueTree;
        use proptest::test_runner::{Config, TestRunner};
        let mut runner = TestRunner::new_with_rng(Config::default(), proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha));
        let strat = random_case();
        for _ in 0..500 {
            let (preds, gts) = strat.new_tree(&mut runner).unwrap().current();
            for t in std::iter::once(25).chain(AP_THRESHOLDS) {
                let got = average_precision(&preds, &gts, t);
                let want = oracle_ap(&preds, &gts, t);
                assert!((got - want).abs() <= 1e-9, "t={t} got {got} want {want} {preds:?} {gts:?}");
            }
        }
    }

    proptest! {
        #[test]
        fn metrics_bounded_and_ordered((preds, gts) in random_case()) {
            let r = evaluate_query("q", &preds, &gts);
            for x in [r.ap, r.ap50, r.ap25] {
                prop_assert!((0.0..=1.0).contains(&x));
            }
            prop_assert!(r.ap <= r.ap50 + 1e-12 && r.ap50 <= r.ap25 + 1e-12, "{} {} {}", r.ap, r.ap50, r.ap25);
        }

        #[test]
        fn input_order_is_irrelevant((preds, gts) in random_case(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            // distinct confidences so that ranking does not depend on input index
            let preds: Vec<ScoredMask> = preds.into_iter().enumerate().map(|(i, p)| pred(p.confidence * 0.5 + i as f64 * 0.01, p.points)).collect();
            let mut shuffled = preds.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(evaluate_query("q", &preds, &gts), {
                let mut r = evaluate_query("q", &shuffled, &gts);
                r.predictions = preds.len();
                r
            });
        }

        #[test]
        fn confidence_scale_is_irrelevant((preds, gts) in random_case(), scale in 0.01f64..1.0) {
            let scaled: Vec<ScoredMask> = preds.iter().map(|p| pred(p.confidence * scale, p.points.clone())).collect();
            prop_assert_eq!(evaluate_query("q", &preds, &gts), evaluate_query("q", &scaled, &gts));
        }
    }
}
