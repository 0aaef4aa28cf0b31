use serde::Serialize;
use serde_json::{json, Value};

use boundfix_core::blowup::{Flag, IwipCertificate, Verdict};
use boundfix_core::index::{render_ratio, Classification, Completeness, IndexReport};
use boundfix_core::traintrack::{InpSearch, RoseTrainTrack};

pub const SCHEMA_VERSION: u32 = 1;

/// Ordered by severity so the worst status of a run is the maximum.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Certified,
    Inconclusive,
    Failed,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Certified => 0,
            Status::Failed => 1,
            Status::Inconclusive => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Certified => "certified",
            Status::Inconclusive => "inconclusive",
            Status::Failed => "failed",
        }
    }

    pub fn of_verdict(v: Verdict) -> Self {
        match v {
            Verdict::Iwip => Status::Certified,
            Verdict::Reducible => Status::Failed,
            Verdict::Inconclusive => Status::Inconclusive,
        }
    }

    pub fn of_flag(f: Flag) -> Self {
        match f {
            Flag::Certified => Status::Certified,
            Flag::Failed => Status::Failed,
            Flag::Inconclusive => Status::Inconclusive,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

/// The result for one rank (or one custom automorphism).
#[derive(Clone, Debug)]
pub struct Section {
    pub checks: Vec<Check>,
    pub text: String,
    pub json: Value,
}

impl Section {
    pub fn new() -> Self {
        Self { checks: Vec::new(), text: String::new(), json: json!({}) }
    }

    pub fn check(&mut self, name: impl Into<String>, status: Status, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), status, detail: detail.into() });
    }

    pub fn status(&self) -> Status {
        self.checks.iter().map(|c| c.status).max().unwrap_or(Status::Certified)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        let worst = self.status();
        (worst != Status::Certified).then(|| self.checks.iter().find(|c| c.status == worst)).flatten()
    }

    pub fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }

    /// Attaches `status` and `checks` to the JSON payload.
    pub fn finish(mut self) -> Self {
        let status = self.status();
        if let Value::Object(m) = &mut self.json {
            m.insert("status".into(), json!(status));
            m.insert("checks".into(), json!(self.checks));
        }
        self
    }
}

impl Default for Section {
    fn default() -> Self {
        Self::new()
    }
}

pub struct Report {
    pub command: &'static str,
    pub sections: Vec<Section>,
}

impl Report {
    pub fn status(&self) -> Status {
        self.sections.iter().map(Section::status).max().unwrap_or(Status::Certified)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        let worst = self.status();
        self.sections.iter().filter(|s| s.status() == worst).find_map(Section::first_failure)
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "schema": SCHEMA_VERSION,
            "command": self.command,
            "status": self.status(),
            "results": self.sections.iter().map(|s| s.json.clone()).collect::<Vec<_>>(),
        });
        if let Some(c) = self.first_failure() {
            v["first_failure"] = json!({ "name": c.name, "detail": c.detail });
        }
        v
    }

    pub fn to_text(&self) -> String {
        let mut out = self.sections.iter().map(|s| s.text.trim_end().to_string()).collect::<Vec<_>>().join("\n\n");
        out.push('\n');
        out.push_str(&format!("status: {}", self.status().label()));
        if let Some(c) = self.first_failure() {
            out.push_str(&format!(" ({}: {})", c.name, c.detail));
        }
        out.push('\n');
        out
    }
}

pub fn inp_json(s: &InpSearch) -> Value {
    json!({
        "mode": format!("{:?}", s.mode).to_lowercase(),
        "max_len": s.max_len,
        "auto_bound": s.auto_bound,
        "conclusive": s.conclusive,
        "conclusive_empty": s.is_conclusive_empty(),
        "engines_agree": s.engines_agree,
        "not_applicable": s.not_applicable,
        "forward_found": s.forward_found,
        "backward_found": s.backward_found,
        "backward": s.backward,
        "paths": s.paths.iter().map(|p| p.render()).collect::<Vec<_>>(),
        "justification": s.justification,
    })
}

pub fn inp_status(s: &InpSearch) -> Status {
    if !s.engines_agree && s.backward.closed {
        Status::Failed
    } else if s.conclusive {
        Status::Certified
    } else {
        Status::Inconclusive
    }
}

pub fn inp_line(label: &str, s: &InpSearch) -> String {
    let verdict = if s.is_conclusive_empty() {
        "none (conclusive)".to_string()
    } else if s.conclusive {
        format!("{} found (conclusive)", s.paths.len())
    } else {
        format!("{} found (inconclusive)", s.paths.len())
    };
    format!("{label}: {verdict}; {}", s.justification)
}

pub fn train_track_json(tt: &RoseTrainTrack) -> Value {
    json!({
        "basis": tt.basis().names(),
        "summary": tt.summary(),
        "gate_count": tt.gates().len(),
        "dmap_period": tt.dmap_period(),
    })
}

pub fn classification_label(c: Classification) -> &'static str {
    match c {
        Classification::Parageometric => "parageometric",
        Classification::Neither => "neither",
        Classification::Unknown => "unknown",
    }
}

pub fn index_json(r: &IndexReport, parageometric: &[(u32, Classification)]) -> Value {
    let flags: serde_json::Map<String, Value> =
        parageometric.iter().map(|(t, c)| (t.to_string(), json!(classification_label(*c)))).collect();
    json!({
        "n": r.n,
        "power": r.power,
        "classes": r.classes.iter().map(|c| json!({
            "label": c.label,
            "fix_rank": c.fix_rank,
            "attracting": c.attracting,
            "contribution": render_ratio(&c.contribution),
        })).collect::<Vec<_>>(),
        "total": render_ratio(&r.total),
        "bound": render_ratio(&r.bound),
        "bound_satisfied": r.bound_satisfied,
        "complete": r.is_complete(),
        "completeness": match &r.completeness {
            Completeness::Complete(why) => why.clone(),
            Completeness::LowerBound => "lower bound on index".into(),
        },
        "parageometric": flags,
    })
}

pub fn iwip_json(c: &IwipCertificate, dot: bool) -> Value {
    let tt = &c.train_track;
    let germs = |after: bool| {
        c.gamma2
            .germ_components(after)
            .iter()
            .map(|comp| comp.iter().map(|&d| tt.render_direction(d)).collect::<Vec<_>>())
            .collect::<Vec<_>>()
    };
    let mut v = json!({
        "basis": tt.basis().names(),
        "primitive": c.primitive,
        "primitivity_exponent": c.primitivity_exponent,
        "gate_count": c.gamma2.gate_count(),
        "simplex_edges": c.gamma2.simplex_edges.len(),
        "simplex_components": c.gamma2.simplex_components().len(),
        "pre_closure_components": c.gamma2.pre_closure_components().len(),
        "germ_components_pre_closure": germs(false),
        "germ_components_post_closure": germs(true),
        "theta_surjective": c.theta_surjective,
        "no_periodic_fixed_factor": c.no_periodic_fixed_factor,
        "verdict": c.verdict,
        "reasoning": c.reasoning,
    });
    if dot {
        v["dot"] = json!(c.gamma2.to_dot(tt));
    }
    v
}

pub fn verdict_label(v: Verdict) -> &'static str {
    match v {
        Verdict::Iwip => "iwip",
        Verdict::Reducible => "reducible",
        Verdict::Inconclusive => "inconclusive",
    }
}
