use serde::{Deserialize, Serialize};
use sosforge_core::algebra::ConstraintSystem;
use sosforge_core::sos::SosCertificate;

use crate::{build_truncated_system, extract_exact, solve_feasibility, SdpOutcome, SolveOptions, Status};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum MinDegree {
    /// Smallest feasible degree; `exact` when extraction confirmed it.
    Found { degree: usize, exact: bool },
    NotFoundBelow { d_max: usize },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DegreeStep {
    pub degree: usize,
    pub status: Status,
    pub iterations: usize,
    /// Constraints of degree above `degree`, left out at this step.
    pub dropped: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DegreeSearch {
    pub result: MinDegree,
    pub steps: Vec<DegreeStep>,
    /// Outcome at the reported degree, or at `d_max`.
    pub outcome: Option<SdpOutcome>,
    /// Why extraction failed, when it did.
    pub extraction_error: Option<String>,
    #[serde(skip)]
    pub certificate: Option<SosCertificate>,
}

/// Tries `d = 0, 1, …, d_max` in turn. At degree `d` constraints of larger
/// degree cannot be multiplied by anything and are left out.
pub fn min_degree(sys: &ConstraintSystem, d_max: usize, opts: &SolveOptions) -> DegreeSearch {
    let mut steps = Vec::new();
    let mut last = None;
    for d in 0..=d_max {
        let cs = build_truncated_system(sys, d);
        let mut out = solve_feasibility(&cs, opts);
        steps.push(DegreeStep {
            degree: d,
            status: out.status,
            iterations: out.iterations,
            dropped: cs.dropped.clone(),
        });
        if out.status == Status::Feasible {
            let (exact, err) = match extract_exact(&out, &cs) {
                Ok(c) => {
                    out.certificate = Some(c);
                    (true, None)
                }
                Err(e) => (false, Some(e.to_string())),
            };
            return DegreeSearch {
                result: MinDegree::Found { degree: d, exact },
                steps,
                certificate: out.certificate.clone(),
                outcome: Some(out),
                extraction_error: err,
            };
        }
        last = Some(out);
    }
    DegreeSearch {
        result: MinDegree::NotFoundBelow { d_max },
        steps,
        outcome: last,
        extraction_error: None,
        certificate: None,
    }
}
