//! Human-readable rendering of reports. Agents are labelled from 1.

use std::fmt::{self, Display, Formatter};

use crate::graph::{AgentSet, Distance};
use crate::stability::{CertificateKind, StabilityReport, TvCertificate, Verdict};

fn agents(set: &AgentSet) -> String {
    if set.is_empty() {
        return "{}".to_string();
    }
    let items: Vec<String> = set.iter().map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", items.join(", "))
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.10}"))
}

impl Display for StabilityReport {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        writeln!(f, "agents            {}", self.n)?;
        writeln!(f, "prejudiced        {}", agents(&self.prejudiced))?;
        writeln!(f, "eps0              {}", opt(self.natural.map(|p| p.eps0)))?;
        writeln!(f, "delta0            {}", opt(self.natural.map(|p| p.delta0)))?;
        match &self.bound_params {
            Some(p) => writeln!(f, "class             delta={} eps={} s={}", p.delta, p.eps, p.s)?,
            None => writeln!(f, "class             not a member for the chosen delta, eps")?,
        }
        writeln!(f, "rho               {:.10}", self.rho)?;
        writeln!(f, "rho*              {}", opt(self.rho_star))?;
        writeln!(f, "corollary bound   {}", opt(self.corollary_bound))?;
        let witness: Vec<String> = self.criterion_witness.iter().map(Distance::to_string).collect();
        writeln!(f, "walk to prejudice [{}]", witness.join(", "))?;
        writeln!(f, "non-degenerate    {}", self.non_degenerate)?;
        writeln!(
            f,
            "verdict           {}",
            if self.schur_stable { "Schur stable" } else { "not Schur stable" }
        )?;
        match self.consensus {
            Some(c) if c.consensus => writeln!(f, "consensus         yes, at {}", opt(c.value)),
            Some(_) => writeln!(f, "consensus         no (prejudiced agents disagree)"),
            None => writeln!(f, "consensus         n/a"),
        }
    }
}

impl Display for TvCertificate {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        let verdict = match self.verdict {
            Verdict::Stable => "STABLE",
            Verdict::Unknown => "UNKNOWN",
        };
        match self.kind {
            CertificateKind::CfjSubsequence => {
                writeln!(
                    f,
                    "mode              chain (delta={} eps={} s={})",
                    self.delta.unwrap_or(f64::NAN),
                    self.eps,
                    self.window_or_s
                )?;
                writeln!(f, "period length     {}", self.period_len)?;
                if let Some(start) = self.window_start {
                    let what = if self.verdict == Verdict::Stable { "witness" } else { "first failing" };
                    writeln!(f, "{what:<17} window at period offset {start}")?;
                }
                for (k, j) in self.j_sets.iter().enumerate() {
                    writeln!(f, "  J_{k:<14} {}", agents(j))?;
                }
            }
            CertificateKind::ConnectivityWindow => {
                writeln!(f, "mode              connectivity (eps={} T={})", self.eps, self.window_or_s)?;
                writeln!(f, "period length     {}", self.period_len)?;
                if let Some(v) = &self.positivity_violation {
                    writeln!(
                        f,
                        "positivity fails  offset {}, entry ({}, {}) = {}",
                        v.offset,
                        v.row + 1,
                        v.col + 1,
                        v.value
                    )?;
                } else if !self.unreached.is_empty() {
                    writeln!(
                        f,
                        "first failing     window at period offset {}, no walk to the virtual agent from {}",
                        self.window_start.unwrap_or(0),
                        agents(&self.unreached)
                    )?;
                }
            }
        }
        writeln!(f, "verdict           {verdict}")
    }
}

#[cfg(test)]
mod tests {
    use crate::fixtures;
    use crate::stability::{analyze, tv_consensus_criterion, tv_stability_certificate_cfj, AnalyzeOptions};

    #[test]
    fn renders_one_based_labels() {
        let m = fixtures::cycle_model(4, 0.5).unwrap();
        let text = analyze(&m, &AnalyzeOptions::default()).unwrap().to_string();
        assert!(text.contains("prejudiced        {1}"));
        assert!(text.contains("Schur stable"));

        let c = tv_stability_certificate_cfj(&fixtures::example1_schedule(), 1.0, 1.0, 1).unwrap();
        let text = c.to_string();
        assert!(text.contains("J_0"));
        assert!(text.contains("{1, 3}"));
        assert!(text.contains("UNKNOWN"));

        let c = tv_consensus_criterion(&fixtures::example2_schedule(), 0.5, 2).unwrap();
        assert!(c.to_string().contains("entry (1, 1) = 0"));
    }
}
