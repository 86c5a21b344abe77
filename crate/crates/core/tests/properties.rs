mod common;

use proptest::prelude::*;
use proptest::test_runner::Config;

use common::invariants::*;

proptest! {
    #![proptest_config(Config::with_cases(1000))]

    #[test]
    fn mu_mapping_is_well_formed_and_rounds_down(case in mu_case()) {
        check_mu(case)?;
    }

    #[test]
    fn lifting_round_trips(case in lift_case()) {
        check_lift(case)?;
    }

    #[test]
    fn lowering_round_trips(case in lower_case()) {
        check_lower(case)?;
    }
}

proptest! {
    #![proptest_config(Config::with_cases(200))]

    #[test]
    fn refinement_matches_rebuild_and_only_grows(case in refine_case()) {
        check_refine(case)?;
    }
}

proptest! {
    #![proptest_config(Config::with_cases(100))]

    #[test]
    fn classes_partition_aux_movement_arcs(case in class_case()) {
        check_classes(case)?;
    }
}
