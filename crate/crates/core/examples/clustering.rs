//! Weighted clustering of zones and sites, the silhouette sweep over k,
//! and the choice of one site per cluster.

use fairvax::fair_kmeans::{
    instance_points, score_sites, select_cluster_sites, select_k, silhouette_score, weighted_lloyd,
};
use fairvax::instance::{generate_clustered, GeneratorConfig};

fn main() -> fairvax::Result<()> {
    let inst = generate_clustered(&GeneratorConfig::default())?;
    let points = instance_points(&inst);

    println!("k  silhouette  wcss");
    for k in 2..=8 {
        let c = weighted_lloyd(&points, k, 1)?;
        println!("{k}  {:>10.4}  {:.1}", silhouette_score(&points, &c)?, c.wcss);
    }

    let chosen = select_k(&points, 2..=8, inst.num_sites(), 1)?;
    println!(
        "\nchosen k = {} (silhouette {:.4})",
        chosen.k,
        chosen.silhouette.unwrap_or(f64::NAN)
    );
    let scores = score_sites(&inst, &chosen);
    let selection = select_cluster_sites(&inst, &chosen)?;
    for (k, list) in scores.iter().enumerate() {
        let top: Vec<String> = list
            .iter()
            .take(3)
            .map(|(i, s)| format!("{}:{s:.3e}", inst.sites[*i].id))
            .collect();
        println!(
            "cluster {} centroid ({:.1}, {:.1}) demand {:>4}  site {}  top scores [{}]",
            k + 1,
            chosen.centroids[k].0,
            chosen.centroids[k].1,
            selection.demand[k],
            inst.sites[selection.sites[k]].id,
            top.join(", ")
        );
    }
    Ok(())
}
