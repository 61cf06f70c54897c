//! Randomized cross-checks between independent implementations: the
//! difference-logic reduction against direct model enumeration, on both
//! strengths and with the cycle analysis on and off.

mod common;

use common::{dl_projected_models, prop_models_by_enumeration, random_prop_theory};
use fofd::defnf::to_defnf;
use fofd::dlreduce::{reduce, ReduceOptions, Strength};
use fofd::ground::print_prop_theory;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn reduction_models_match_direct_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xd1ff);
    for round in 0..200 {
        let pt = random_prop_theory(&mut rng);
        let expected = prop_models_by_enumeration(&pt);
        let nf = to_defnf(&pt);
        for strength in [Strength::Weak, Strength::Strong] {
            for scc in [true, false] {
                let dl = reduce(&nf, ReduceOptions { strength, scc });
                let got = dl_projected_models(&dl);
                assert_eq!(
                    got,
                    expected,
                    "round {round}, {strength:?}, scc={scc}\n{}\nclauses:\n{}",
                    print_prop_theory(&pt),
                    dl.clause_strings().join("\n")
                );
            }
        }
    }
}
