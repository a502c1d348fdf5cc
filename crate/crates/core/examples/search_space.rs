//! Size of the zone-to-site choice space, (2n)^m, against the cluster
//! version (2n)^K.

use fairvax::exact_solver::full_enumeration_nodes;
use fairvax::formulation::{search_space_label, search_space_size};

fn main() {
    let n = 10;
    for (what, count) in [("zones", 34), ("clusters", 4)] {
        println!(
            "{what:>8}: {} = {}",
            search_space_label(n, count),
            search_space_size(n, count)
        );
    }
    println!();
    println!("exhaustive search nodes for small instances:");
    for (n, m) in [(2, 2), (3, 3), (4, 6), (6, 10)] {
        println!("  n={n} m={m:>2}: {}", full_enumeration_nodes(n, m));
    }
}
