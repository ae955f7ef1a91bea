//! Bundled data.

use crate::io::read_dataset;
use crate::model::CountsTable;

const VITAMIN_A_CSV: &str = include_str!("../data/vitamin_a.csv");

/// Mortality in a village-randomized vitamin A supplementation trial.
///
/// `z` is assignment to supplementation, `a` actual receipt, and `y = 1`
/// survival. Nobody in the control villages could obtain the supplement,
/// so cells `(z=0, a=1, ·)` are empty.
pub fn vitamin_a() -> CountsTable {
    read_dataset(VITAMIN_A_CSV.as_bytes())
        .expect("bundled dataset parses")
        .counts
}

pub fn vitamin_a_csv() -> &'static str {
    VITAMIN_A_CSV
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn totals() {
        let c = vitamin_a();
        assert_eq!(c.arm_total(0), 11588);
        assert_eq!(c.arm_total(1), 12094);
        assert_eq!(c.get(0, 1, 0) + c.get(0, 1, 1), 0);
    }
}
