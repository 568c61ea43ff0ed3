//! Public transcripts as JSON lines, and the observer that replays them.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};

/// Who put a line on the transcript.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Sender {
    Cmpc,
    Party(usize),
}

impl fmt::Display for Sender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sender::Cmpc => f.write_str("cmpc"),
            Sender::Party(p) => write!(f, "p{p}"),
        }
    }
}

impl From<Sender> for String {
    fn from(s: Sender) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for Sender {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        if s == "cmpc" {
            return Ok(Sender::Cmpc);
        }
        s.strip_prefix('p')
            .and_then(|n| n.parse().ok())
            .map(Sender::Party)
            .ok_or_else(|| format!("bad sender {s:?}"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub round: u64,
    pub sender: Sender,
    #[serde(rename = "type")]
    pub kind: String,
    pub payload: Value,
}

/// Line types with a fixed meaning for the observer.
pub mod kinds {
    pub const PARAMS: &str = "params";
    pub const IDENTIFY: &str = "identify";
    pub const ABORT: &str = "abort";
    pub const OUTPUT: &str = "output";
    pub const AQA_REPORT: &str = "aqa.report";
    pub const AQA_VERDICT: &str = "aqa.verdict";
    pub const RQC_REPORT: &str = "rqc.report";
    pub const IE_REPORT: &str = "ie.report";
}

/// Append-only list of public messages.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Transcript {
    lines: Vec<Line>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, round: u64, sender: Sender, kind: &str, payload: Value) {
        self.lines.push(Line {
            round,
            sender,
            kind: kind.to_string(),
            payload,
        });
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn to_jsonl(&self) -> String {
        let mut s = String::new();
        for l in &self.lines {
            s.push_str(&serde_json::to_string(l).expect("lines serialize"));
            s.push('\n');
        }
        s
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(self.to_jsonl().as_bytes())?;
        f.flush()?;
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::read(text.as_bytes())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: Line = serde_json::from_str(&line).map_err(|e| Error::Transcript {
                line: i + 1,
                message: e.to_string(),
            })?;
            lines.push(parsed);
        }
        Ok(Self { lines })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

/// What an outside observer concludes from a transcript.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicVerdict {
    pub aborted: bool,
    pub identified: Vec<usize>,
}

impl PublicVerdict {
    pub fn to_json(&self) -> Value {
        json!({ "aborted": self.aborted, "identified": self.identified })
    }
}

/// Recomputes the verdict of a run from its public lines.
///
/// A transcript is a sequence of segments, each opened by a `params` line
/// (one per protocol instance, e.g. per partition group). Within a segment
/// the observer collects identified parties, applies the `|Corr| > thres`
/// rule with the published threshold, and checks that the closing line the
/// run recorded agrees. The run aborts if any segment does.
pub fn observer_replay(t: &Transcript) -> Result<PublicVerdict> {
    let err = |line: usize, message: String| Error::Transcript { line, message };
    if t.lines.is_empty() {
        return Err(err(1, "empty transcript".into()));
    }
    let mut aborted = false;
    let mut all = BTreeSet::new();
    // (thres, corr, closed)
    let mut seg: Option<(usize, BTreeSet<usize>, bool)> = None;
    for (i, line) in t.lines.iter().enumerate() {
        let no = i + 1;
        if line.kind == kinds::PARAMS {
            if let Some((_, _, false)) = seg {
                return Err(err(no, "new segment before the previous verdict".into()));
            }
            let thres = line.payload["thres"]
                .as_u64()
                .ok_or_else(|| err(no, "params without thres".into()))?;
            seg = Some((thres as usize, BTreeSet::new(), false));
            continue;
        }
        let Some((thres, corr, closed)) = seg.as_mut() else {
            return Err(err(no, "first line must be params".into()));
        };
        if *closed {
            return Err(err(no, "line after the closing verdict".into()));
        }
        match line.kind.as_str() {
            kinds::IDENTIFY => {
                let p = line.payload["party"]
                    .as_u64()
                    .ok_or_else(|| err(no, "identify without party".into()))?;
                corr.insert(p as usize);
            }
            kinds::AQA_VERDICT => {
                if let Some(p) = line.payload["identified"].as_u64() {
                    corr.insert(p as usize);
                }
            }
            kinds::ABORT | kinds::OUTPUT => {
                let derived_abort = corr.len() > *thres;
                let recorded_abort = line.kind == kinds::ABORT;
                if derived_abort != recorded_abort {
                    return Err(err(
                        no,
                        format!("recorded {} with {} identified and thres {thres}", line.kind, corr.len()),
                    ));
                }
                if recorded_abort {
                    let named: Vec<usize> = serde_json::from_value(line.payload["identified"].clone())
                        .map_err(|e| err(no, e.to_string()))?;
                    if named != corr.iter().copied().collect::<Vec<_>>() {
                        return Err(err(no, format!("abort names {named:?}, transcript identifies {corr:?}")));
                    }
                }
                aborted |= recorded_abort;
                all.extend(corr.iter().copied());
                *closed = true;
            }
            _ => {}
        }
    }
    if let Some((_, _, false)) = seg {
        return Err(err(t.lines.len() + 1, "transcript ends without a verdict".into()));
    }
    Ok(PublicVerdict {
        aborted,
        identified: all.into_iter().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(identified: &[usize], thres: usize) -> Transcript {
        let mut t = Transcript::new();
        t.push(0, Sender::Cmpc, kinds::PARAMS, json!({"n": 3, "thres": thres}));
        for &p in identified {
            t.push(1, Sender::Cmpc, kinds::IDENTIFY, json!({"party": p}));
        }
        if identified.len() > thres {
            t.push(2, Sender::Cmpc, kinds::ABORT, json!({"identified": identified}));
        } else {
            t.push(2, Sender::Cmpc, kinds::OUTPUT, json!({"r_out": ""}));
        }
        t
    }

    #[test]
    fn roundtrip_and_replay() {
        let t = sample(&[2], 0);
        let back = Transcript::parse(&t.to_jsonl()).unwrap();
        assert_eq!(back, t);
        let v = observer_replay(&back).unwrap();
        assert!(v.aborted);
        assert_eq!(v.identified, vec![2]);
        let v = observer_replay(&sample(&[1], 1)).unwrap();
        assert!(!v.aborted);
    }

    #[test]
    fn truncated_transcript_reports_position() {
        let text = sample(&[], 0).to_jsonl();
        let cut = &text[..text.len() - 10];
        match Transcript::parse(cut) {
            Err(Error::Transcript { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let only_params: String = text.lines().next().unwrap().to_string();
        assert!(matches!(
            observer_replay(&Transcript::parse(&only_params).unwrap()),
            Err(Error::Transcript { line: 2, .. })
        ));
    }

    #[test]
    fn inconsistent_closing_line_is_rejected() {
        let mut t = sample(&[1], 1);
        t.lines.pop();
        t.push(3, Sender::Cmpc, kinds::ABORT, json!({"identified": [1]}));
        assert!(observer_replay(&t).is_err());
    }
}
