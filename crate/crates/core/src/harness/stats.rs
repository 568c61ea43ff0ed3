//! Per-trial outcomes and their aggregate.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::mpqc::MpqcOutcome;

use super::scenario::{bit_string, total_variation};

/// What one trial produced.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrialOutcome {
    /// The AQA verdict accepted, or the run finished without abort.
    pub accepted: bool,
    pub aborted: bool,
    /// Publicly identified parties, sorted.
    pub identified: Vec<usize>,
    pub output_correct: bool,
    /// The report offset lies in the range of the key's check map.
    pub oracle_hit: bool,
    /// Observer replay of the transcript matches the run.
    pub replay_ok: bool,
    pub decode_failures: usize,
    /// Disagreeing checked positions of an accepted AQA.
    pub flips: Option<usize>,
    /// Public classical output, `"abort"` on abort.
    pub key: Option<String>,
    /// Same, from the ideal functionality.
    pub ideal_key: Option<String>,
}

impl TrialOutcome {
    pub fn from_run(res: &MpqcOutcome) -> Self {
        Self {
            accepted: !res.aborted,
            aborted: res.aborted,
            identified: res.identified.clone(),
            decode_failures: res.decode_failures,
            key: Some(if res.aborted { "abort".into() } else { bit_string(&res.r_out) }),
            ..Default::default()
        }
    }
}

/// Counters over a scenario's trials. Each counter is an independent tally.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub scenario: String,
    pub trials: u64,
    pub accepted: u64,
    /// Trials naming at least one party, all of them corrupted.
    pub identified_correct: u64,
    /// Trials naming some honest party.
    pub identified_wrong: u64,
    pub aborts: u64,
    pub output_correct: u64,
    pub oracle_hits: u64,
    pub replay_mismatches: u64,
    pub decode_failures: u64,
    /// How often each party was named.
    pub named: BTreeMap<usize, u64>,
    /// Checked-position disagreements over accepted AQA trials.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub flips: BTreeMap<usize, u64>,
    /// Public classical outputs.
    pub histogram: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub ideal_histogram: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tv_distance: Option<f64>,
    /// Wall-clock time; kept out of the JSON so it stays reproducible.
    #[serde(skip)]
    pub seconds: f64,
}

impl TrialStats {
    pub fn aggregate(scenario: &str, corrupted: &BTreeSet<usize>, outcomes: &[TrialOutcome]) -> Self {
        let mut s = TrialStats {
            scenario: scenario.to_string(),
            trials: outcomes.len() as u64,
            ..Default::default()
        };
        for o in outcomes {
            s.accepted += o.accepted as u64;
            s.aborts += o.aborted as u64;
            s.output_correct += o.output_correct as u64;
            s.oracle_hits += o.oracle_hit as u64;
            s.replay_mismatches += !o.replay_ok as u64;
            s.decode_failures += o.decode_failures as u64;
            if !o.identified.is_empty() {
                if o.identified.iter().all(|p| corrupted.contains(p)) {
                    s.identified_correct += 1;
                } else {
                    s.identified_wrong += 1;
                }
            }
            for &p in &o.identified {
                *s.named.entry(p).or_default() += 1;
            }
            if let Some(f) = o.flips {
                *s.flips.entry(f).or_default() += 1;
            }
            if let Some(k) = &o.key {
                *s.histogram.entry(k.clone()).or_default() += 1;
            }
            if let Some(k) = &o.ideal_key {
                *s.ideal_histogram.entry(k.clone()).or_default() += 1;
            }
        }
        if !s.ideal_histogram.is_empty() {
            s.tv_distance = Some(total_variation(&s.histogram, &s.ideal_histogram));
        }
        s
    }

    /// Whether soundness and transcript checks held.
    pub fn invariants_hold(&self) -> bool {
        self.identified_wrong == 0 && self.replay_mismatches == 0
    }

    pub fn rate(&self, count: u64) -> f64 {
        count as f64 / self.trials as f64
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stats serialize")
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:.3}",
            self.scenario,
            self.trials,
            self.accepted,
            self.identified_correct,
            self.identified_wrong,
            self.aborts,
            self.output_correct,
            self.seconds
        )
    }

    /// Human-readable table; a pure function of the counters.
    pub fn table(&self) -> String {
        let mut rows: Vec<(&str, String)> = vec![
            ("scenario", self.scenario.clone()),
            ("trials", self.trials.to_string()),
            ("accepted", self.accepted.to_string()),
            ("identified_correct", self.identified_correct.to_string()),
            ("identified_wrong", self.identified_wrong.to_string()),
            ("aborts", self.aborts.to_string()),
            ("output_correct", self.output_correct.to_string()),
            ("oracle_hits", self.oracle_hits.to_string()),
            ("replay_mismatches", self.replay_mismatches.to_string()),
            ("decode_failures", self.decode_failures.to_string()),
        ];
        let named: Vec<String> = self.named.iter().map(|(p, c)| format!("p{p}:{c}")).collect();
        rows.push(("named", if named.is_empty() { "-".into() } else { named.join(" ") }));
        if !self.flips.is_empty() {
            let f: Vec<String> = self.flips.iter().map(|(w, c)| format!("{w}:{c}")).collect();
            rows.push(("flips", f.join(" ")));
        }
        if let Some(tv) = self.tv_distance {
            rows.push(("tv_distance", format!("{tv:.4}")));
        }
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        rows.iter().map(|(k, v)| format!("{k:<width$}  {v}\n")).collect()
    }
}
