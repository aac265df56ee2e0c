//! The inspect command: human-readable dumps of scenarios and checkpoints.

use anyhow::{bail, Result};

use enroute_core::load_scenario;
use enroute_core::nn::checkpoint;

use crate::args::InspectArgs;

pub fn cmd_inspect(args: &InspectArgs) -> Result<()> {
    if args.scenario.is_none() && args.checkpoint.is_none() {
        bail!("inspect needs --scenario and/or --checkpoint");
    }

    if let Some(path) = &args.scenario {
        let loaded = load_scenario(path)?;
        let layout = &loaded.config.layout;
        println!("scenario: {}", loaded.name);
        println!(
            "routes: {} ({})",
            layout.routes().len(),
            layout
                .routes()
                .iter()
                .map(|r| format!("{}: {:.1} nmi", r.id, r.length()))
                .collect::<Vec<_>>()
                .join(", ")
        );
        println!("crossings: {}", layout.intersections().len());
        for (i, c) in layout.intersections().iter().enumerate() {
            println!(
                "  I{}: {} at arc {:.1} / {} at arc {:.1}",
                i + 1,
                c.routes.0,
                c.arc_positions.0,
                c.routes.1,
                c.arc_positions.1
            );
        }
        println!("merge points: {}", layout.merge_points().len());
        for (i, m) in layout.merge_points().iter().enumerate() {
            let upstream = m
                .upstream_routes
                .iter()
                .zip(&m.arc_positions)
                .map(|(r, a)| format!("{r} at arc {a:.1}"))
                .collect::<Vec<_>>()
                .join(", ");
            let shared: f64 = m
                .shared_segment
                .windows(2)
                .map(|w| enroute_core::geometry::euclidean_separation(w[0], w[1]))
                .sum();
            println!("  M{}: {} -> {:.1} nmi shared segment", i + 1, upstream, shared);
        }
        let mut pairs = Vec::new();
        for route in layout.routes() {
            for other in layout.conflicting_routes(route.id)? {
                if route.id < *other {
                    pairs.push(format!("{}-{}", route.id, other));
                }
            }
        }
        println!("conflict graph: {{{}}}", pairs.join(", "));
        println!(
            "traffic: {} aircraft, n_closest {}, entry speed {} kts",
            loaded.config.max_aircraft, loaded.config.n_closest, loaded.config.entry_speed_kts
        );
        println!(
            "separation: {} nmi minimum, {} nmi alert radius",
            loaded.config.los_nmi, loaded.config.alert_nmi
        );
        let net = loaded.config.network_config();
        println!(
            "observation length: {} (ownship 6 + {} slots of 8)",
            net.input_width(),
            loaded.config.n_closest
        );
    }

    if let Some(path) = &args.checkpoint {
        let params = checkpoint::load(path)?;
        println!("checkpoint: {}", path.display());
        println!(
            "network: own {} + local {} -> encoder {} -> hidden {}x2 -> {} actions + value",
            params.config.own_width,
            params.config.local_width,
            params.config.encoder_width,
            params.config.hidden_width,
            params.config.num_actions
        );
        for (name, layer) in params.layers.layers() {
            println!("  {name}: {} x {} (+{} bias)", layer.out_dim, layer.in_dim, layer.out_dim);
        }
        println!("parameters: {}", params.param_count());
        println!("adam steps: {}", params.adam_steps);
    }
    Ok(())
}
