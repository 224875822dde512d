//! JSON shapes for CLI reports. Field order is declaration order, so
//! identical runs render byte-identical output.

use serde::Serialize;

use npflow::chain::ConsistencyReport;
use npflow::constraint::PaperBasisReport;
use npflow::flip::ExampleReport;
use npflow::invariant::InvariantMeasure;
use npflow::maps::MapTable;
use npflow::ratio::{format_ratio, Ratio};
use npflow::space::FiniteSpace;

pub fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialization cannot fail");
    s.push('\n');
    s
}

#[derive(Serialize)]
pub struct CascadeFile {
    pub m: usize,
    pub seed: Vec<usize>,
    pub class_id: Option<usize>,
    pub levels: Vec<CascadeLevel>,
}

#[derive(Serialize)]
pub struct CascadeLevel {
    pub level: usize,
    pub support: Vec<Vec<usize>>,
    pub masses: Vec<String>,
}

pub fn cascade_file(m: usize, seed: &[usize], cascade: &[InvariantMeasure]) -> CascadeFile {
    let space = FiniteSpace::new(m).expect("valid m");
    let levels = cascade
        .iter()
        .map(|measure| {
            let support = measure
                .masses()
                .iter()
                .map(|(idx, _)| {
                    space
                        .decode(measure.level(), *idx)
                        .expect("support index valid")
                        .entries()
                        .to_vec()
                })
                .collect();
            let masses = measure.masses().iter().map(|(_, w)| format_ratio(w)).collect();
            CascadeLevel { level: measure.level(), support, masses }
        })
        .collect();
    CascadeFile {
        m,
        seed: seed.to_vec(),
        class_id: cascade.first().and_then(|v| v.class_id()),
        levels,
    }
}

#[derive(Serialize)]
pub struct ConsistencyFile {
    pub check: &'static str,
    pub m: usize,
    pub n: usize,
    pub pairs_checked: usize,
    pub pass: bool,
    pub mismatches: Vec<MismatchFile>,
}

#[derive(Serialize)]
pub struct MismatchFile {
    pub r: usize,
    pub i_r: usize,
    pub row: usize,
    pub col: usize,
    pub got: String,
    pub want: String,
}

pub fn consistency_file(report: &ConsistencyReport) -> ConsistencyFile {
    ConsistencyFile {
        check: "consistency",
        m: report.m,
        n: report.n,
        pairs_checked: report.pairs_checked,
        pass: report.passed(),
        mismatches: report
            .mismatches
            .iter()
            .map(|mm| MismatchFile {
                r: mm.r,
                i_r: mm.i_r,
                row: mm.row,
                col: mm.col,
                got: format_ratio(&mm.got),
                want: format_ratio(&mm.want),
            })
            .collect(),
    }
}

#[derive(Serialize)]
pub struct ProjectionInvarianceFile {
    pub check: &'static str,
    pub m: usize,
    pub seed: Vec<usize>,
    pub level: usize,
    pub pass: bool,
    pub per_coordinate: Vec<CoordinateVerdict>,
}

#[derive(Serialize)]
pub struct CoordinateVerdict {
    pub r: usize,
    pub pass: bool,
}

#[derive(Serialize)]
pub struct ExampleFile {
    pub check: &'static str,
    pub m: usize,
    pub grid: Vec<String>,
    pub pass: bool,
    pub onepoint_invariant: bool,
    pub twopoint_invariant: bool,
    pub threepoint_differs: bool,
    pub threepoint_witness: Option<(usize, usize)>,
    pub support_card_unperturbed: usize,
    pub support_cards_perturbed: Vec<(String, usize)>,
}

pub fn example_file(report: &ExampleReport) -> ExampleFile {
    ExampleFile {
        check: "example",
        m: report.m,
        grid: report.grid.iter().map(format_ratio).collect(),
        pass: report.passed(),
        onepoint_invariant: report.onepoint_invariant,
        twopoint_invariant: report.twopoint_invariant,
        threepoint_differs: report.threepoint_differs,
        threepoint_witness: report.threepoint_witness,
        support_card_unperturbed: report.support_card_unperturbed,
        support_cards_perturbed: report
            .support_cards_perturbed
            .iter()
            .map(|(eps, card)| (format_ratio(eps), *card))
            .collect(),
    }
}

#[derive(Serialize)]
pub struct PaperBasisFile {
    pub check: &'static str,
    pub pass: bool,
    pub nullspace_dim: usize,
    pub six_sum_is_zero: bool,
    pub all_five_subsets_independent: bool,
    pub combined_span_dim: usize,
    pub first_type: Vec<VectorVerdictFile>,
    pub second_type: Vec<VectorVerdictFile>,
}

#[derive(Serialize)]
pub struct VectorVerdictFile {
    pub labels: Vec<usize>,
    pub in_nullspace: bool,
    pub passing_variant: Option<String>,
}

pub fn paper_basis_file(report: &PaperBasisReport) -> PaperBasisFile {
    let verdicts = |family: &[npflow::constraint::BasisVectorVerdict]| {
        family
            .iter()
            .map(|v| VectorVerdictFile {
                labels: v.labels.clone(),
                in_nullspace: v.in_nullspace,
                passing_variant: v.passing_variant.clone(),
            })
            .collect()
    };
    PaperBasisFile {
        check: "paper-basis",
        pass: report.passed(),
        nullspace_dim: report.nullspace_dim,
        six_sum_is_zero: report.six_sum_is_zero,
        all_five_subsets_independent: report.all_five_subsets_independent,
        combined_span_dim: report.combined_span_dim,
        first_type: verdicts(&report.first_type),
        second_type: verdicts(&report.second_type),
    }
}

#[derive(Serialize)]
pub struct SimpleCheckFile {
    pub check: &'static str,
    pub pass: bool,
}

#[derive(Serialize)]
pub struct BirkhoffFile {
    pub m: usize,
    pub atoms: Vec<BirkhoffAtom>,
}

#[derive(Serialize)]
pub struct BirkhoffAtom {
    pub perm: Vec<usize>,
    pub weight: String,
}

pub fn birkhoff_file(m: usize, atoms: &[(MapTable, Ratio)]) -> BirkhoffFile {
    BirkhoffFile {
        m,
        atoms: atoms
            .iter()
            .map(|(f, w)| BirkhoffAtom { perm: f.images().to_vec(), weight: format_ratio(w) })
            .collect(),
    }
}
