//! Text formats: the event log, truth and timeline CSVs, and metadata files.
//!
//! Event log, one record per line:
//!
//! ```text
//! # relpos event log v1
//! prior,<user>,<x>,<y>,<theta>
//! <t>,imu,<user>,<dx>,<dy>,<dtheta>
//! <t>,uwb,<from>,<to>,<z>
//! ```
//!
//! Timestamps are written with millisecond precision, all other reals with
//! the shortest representation that parses back to the same value, so a
//! file written here is reproduced byte for byte by `write(parse(file))`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use relpos::{GroundTruth, InertialDelta, MeasurementEvent, Pose, RangeObservation, UserId};

use crate::error::{HarnessError, Result};

pub const LOG_HEADER: &str = "# relpos event log v1";
pub const TRUTH_HEADER: &str = "t,user,x,y,theta";
pub const TIMELINE_HEADER: &str = "t,user,x,y,theta";

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EventLog {
    pub priors: BTreeMap<UserId, Pose<f64>>,
    pub events: Vec<MeasurementEvent<f64>>,
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| HarnessError::io(path, e))
}

fn field<T: std::str::FromStr>(s: &str, what: &str, origin: &str, line: usize) -> Result<T> {
    s.trim().parse().map_err(|_| HarnessError::Parse {
        path: origin.to_string(),
        line,
        msg: format!("invalid {what}: {s:?}"),
    })
}

fn finite(v: f64, what: &str, origin: &str, line: usize) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(HarnessError::Parse {
            path: origin.to_string(),
            line,
            msg: format!("{what} must be finite"),
        })
    }
}

impl EventLog {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut log = EventLog::default();
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, first)) if first.trim_end() == LOG_HEADER => {}
            _ => {
                return Err(HarnessError::Parse {
                    path: origin.to_string(),
                    line: 1,
                    msg: format!("expected header {LOG_HEADER:?}"),
                })
            }
        }
        let mut last_t = f64::NEG_INFINITY;
        let mut last_imu: BTreeMap<UserId, f64> = BTreeMap::new();
        for (i, raw) in lines {
            let n = i + 1;
            let line = raw.trim_end();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            let bad = |msg: String| HarnessError::Parse {
                path: origin.to_string(),
                line: n,
                msg,
            };
            if cols[0] == "prior" {
                if !log.events.is_empty() {
                    return Err(bad("prior records must precede events".into()));
                }
                if cols.len() != 5 {
                    return Err(bad(format!("prior record needs 5 fields, got {}", cols.len())));
                }
                let user = UserId(field(cols[1], "user", origin, n)?);
                let x = finite(field(cols[2], "x", origin, n)?, "x", origin, n)?;
                let y = finite(field(cols[3], "y", origin, n)?, "y", origin, n)?;
                let th = finite(field(cols[4], "theta", origin, n)?, "theta", origin, n)?;
                if log.priors.insert(user, Pose::new(x, y, th)).is_some() {
                    return Err(bad(format!("duplicate prior for user {user}")));
                }
                continue;
            }
            if cols.len() < 2 {
                return Err(bad(format!("unrecognised record {line:?}")));
            }
            let t: f64 = finite(field(cols[0], "timestamp", origin, n)?, "timestamp", origin, n)?;
            if t < last_t {
                return Err(bad(format!("timestamp {t} precedes {last_t}")));
            }
            last_t = t;
            let event = match (cols[1], cols.len()) {
                ("imu", 6) => {
                    let user = UserId(field(cols[2], "user", origin, n)?);
                    if let Some(&prev) = last_imu.get(&user) {
                        if t <= prev {
                            return Err(bad(format!("inertial timestamps of user {user} must increase")));
                        }
                    }
                    last_imu.insert(user, t);
                    MeasurementEvent::Inertial(InertialDelta {
                        dx: finite(field(cols[3], "dx", origin, n)?, "dx", origin, n)?,
                        dy: finite(field(cols[4], "dy", origin, n)?, "dy", origin, n)?,
                        dtheta: finite(field(cols[5], "dtheta", origin, n)?, "dtheta", origin, n)?,
                        user,
                        t,
                    })
                }
                ("uwb", 5) => {
                    let obs = RangeObservation {
                        from: UserId(field(cols[2], "from", origin, n)?),
                        to: UserId(field(cols[3], "to", origin, n)?),
                        z: field(cols[4], "range", origin, n)?,
                        t,
                    };
                    obs.validate().map_err(|e| bad(e.to_string()))?;
                    MeasurementEvent::Range(obs)
                }
                (kind, k) => return Err(bad(format!("bad {kind:?} record with {k} fields"))),
            };
            log.events.push(event);
        }
        Ok(log)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_file(path)?, &path.display().to_string())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(LOG_HEADER);
        out.push('\n');
        for (u, p) in &self.priors {
            let _ = writeln!(out, "prior,{u},{},{},{}", p.x, p.y, p.theta);
        }
        for e in &self.events {
            match e {
                MeasurementEvent::Inertial(m) => {
                    let _ = writeln!(out, "{:.3},imu,{},{},{},{}", m.t, m.user, m.dx, m.dy, m.dtheta);
                }
                MeasurementEvent::Range(r) => {
                    let _ = writeln!(out, "{:.3},uwb,{},{},{}", r.t, r.from, r.to, r.z);
                }
            }
        }
        out
    }
}

pub fn truth_to_csv(truth: &GroundTruth<f64>) -> String {
    let mut out = String::from(TRUTH_HEADER);
    out.push('\n');
    for k in 0..truth.len() {
        let t = truth.dt * k as f64;
        for (u, poses) in &truth.users {
            let p = poses[k];
            let _ = writeln!(out, "{t:.3},{u},{},{},{}", p.x, p.y, p.theta);
        }
    }
    out
}

/// Rows of `(t, user, pose)` from a `t,user,x,y,theta` CSV.
fn parse_pose_rows(text: &str, header: &str, origin: &str) -> Result<Vec<(f64, UserId, Pose<f64>)>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == header => {}
        _ => {
            return Err(HarnessError::Parse {
                path: origin.to_string(),
                line: 1,
                msg: format!("expected header {header:?}"),
            })
        }
    }
    let mut rows = Vec::new();
    for (i, raw) in lines {
        let n = i + 1;
        let line = raw.trim_end();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(HarnessError::Parse {
                path: origin.to_string(),
                line: n,
                msg: format!("expected 5 fields, got {}", cols.len()),
            });
        }
        let t = field(cols[0], "t", origin, n)?;
        let u = UserId(field(cols[1], "user", origin, n)?);
        let pose = Pose::new(
            field(cols[2], "x", origin, n)?,
            field(cols[3], "y", origin, n)?,
            field(cols[4], "theta", origin, n)?,
        );
        rows.push((t, u, pose));
    }
    Ok(rows)
}

pub fn truth_from_csv(text: &str, origin: &str) -> Result<GroundTruth<f64>> {
    let rows = parse_pose_rows(text, TRUTH_HEADER, origin)?;
    let mut users: BTreeMap<UserId, Vec<Pose<f64>>> = BTreeMap::new();
    let mut times: Vec<f64> = Vec::new();
    for (t, u, p) in rows {
        if times.last() != Some(&t) {
            times.push(t);
        }
        users.entry(u).or_default().push(p);
    }
    let dt = if times.len() > 1 { times[1] - times[0] } else { 1.0 };
    let uniform = times
        .iter()
        .enumerate()
        .all(|(k, &t)| (t - dt * k as f64).abs() < 1e-6);
    if times.first().is_some_and(|&t| t != 0.0) || !uniform || !(dt > 0.0) {
        return Err(HarnessError::Data(format!("{origin}: truth must be sampled uniformly from t=0")));
    }
    if users.values().any(|ps| ps.len() != times.len()) {
        return Err(HarnessError::Data(format!("{origin}: every user needs a pose at every time")));
    }
    Ok(GroundTruth { dt, users })
}

/// Estimated poses per timestamp.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EstimateTimeline {
    pub rows: Vec<(f64, BTreeMap<UserId, Pose<f64>>)>,
    pub config_hash: String,
    pub seed: u64,
}

impl EstimateTimeline {
    pub fn user_track(&self, u: UserId) -> Vec<(f64, Pose<f64>)> {
        self.rows
            .iter()
            .filter_map(|(t, poses)| poses.get(&u).map(|p| (*t, *p)))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(TIMELINE_HEADER);
        out.push('\n');
        for (t, poses) in &self.rows {
            for (u, p) in poses {
                let _ = writeln!(out, "{t:.3},{u},{},{},{}", p.x, p.y, p.theta);
            }
        }
        out
    }

    pub fn from_csv(text: &str, origin: &str) -> Result<Self> {
        let mut tl = EstimateTimeline::default();
        for (t, u, p) in parse_pose_rows(text, TIMELINE_HEADER, origin)? {
            match tl.rows.last_mut() {
                Some((lt, poses)) if *lt == t => {
                    poses.insert(u, p);
                }
                _ => tl.rows.push((t, BTreeMap::from([(u, p)]))),
            }
        }
        Ok(tl)
    }
}

pub fn meta_to_text(entries: &[(String, String)]) -> String {
    entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}
