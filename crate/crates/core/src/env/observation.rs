//! Per-agent observation construction: eligibility filtering, N-closest
//! selection, feature scaling, and sentinel padding.
//!
//! Layout of one observation (all features scaled, see below):
//!
//! ```text
//! [ ownship block: dist_goal, speed, accel, dist_int, route, half_los ]
//! [ slot 1: d, los, <neighbor block of 6> ]
//! ...
//! [ slot n_closest ]
//! ```
//!
//! Scaling: along-route distances are divided by the route length, speeds
//! map to [-1, 1] over the envelope, acceleration is divided by the envelope
//! rate, the route id maps to [0, 1], and separation-standard distances are
//! divided by the alert radius. Empty slots hold a phantom aircraft "at
//! infinity": d = 1, los = 0, neighbor block all zero.

use crate::dynamics::AircraftState;
use crate::geometry::{euclidean_separation, Point, SectorLayout};

use super::ScenarioConfig;

/// Features in the ownship block.
pub const OWNSHIP_BLOCK_LEN: usize = 6;
/// Features per neighbor slot: distance, pairwise LOS, neighbor block.
pub const NEIGHBOR_SLOT_LEN: usize = 2 + OWNSHIP_BLOCK_LEN;

/// Fixed-length per-agent feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationVector {
    features: Vec<f64>,
    n_closest: usize,
}

impl ObservationVector {
    pub fn expected_len(n_closest: usize) -> usize {
        OWNSHIP_BLOCK_LEN + n_closest * NEIGHBOR_SLOT_LEN
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.features
    }

    pub fn ownship_block(&self) -> &[f64] {
        &self.features[..OWNSHIP_BLOCK_LEN]
    }

    pub fn slot(&self, i: usize) -> &[f64] {
        let start = OWNSHIP_BLOCK_LEN + i * NEIGHBOR_SLOT_LEN;
        &self.features[start..start + NEIGHBOR_SLOT_LEN]
    }

    pub fn n_closest(&self) -> usize {
        self.n_closest
    }

    #[cfg(test)]
    pub(crate) fn test_only(features: Vec<f64>) -> Self {
        ObservationVector { features, n_closest: 0 }
    }
}

/// Aircraft allowed into the ownship's observation: everyone on the same
/// route, and aircraft on conflicting routes that have not yet reached a
/// crossing/merge point shared with the ownship's route.
pub fn neighbor_filter<'a>(
    ownship: &AircraftState,
    all_active: &'a [AircraftState],
    layout: &SectorLayout,
) -> Vec<&'a AircraftState> {
    all_active
        .iter()
        .filter(|other| other.active && other.id != ownship.id)
        .filter(|other| {
            if other.route == ownship.route {
                return true;
            }
            layout
                .shared_points(ownship.route, other.route)
                .iter()
                .any(|sp| other.arc_pos < sp.arc_on_second)
        })
        .collect()
}

fn scaled_speed(v: f64, config: &ScenarioConfig) -> f64 {
    let env = &config.envelope;
    let mid = 0.5 * (env.v_min_kts + env.v_max_kts);
    let half = 0.5 * (env.v_max_kts - env.v_min_kts);
    (v - mid) / half
}

fn scaled_route(route: crate::geometry::RouteId, layout: &SectorLayout) -> f64 {
    let n = layout.routes().len();
    if n <= 1 {
        0.0
    } else {
        route.0 as f64 / (n - 1) as f64
    }
}

/// The six state features of one aircraft, each scaled as described in the
/// module docs.
fn aircraft_block(state: &AircraftState, config: &ScenarioConfig, layout: &SectorLayout) -> [f64; 6] {
    let route = layout.route(state.route).expect("aircraft routes exist in the layout");
    let len = route.length();
    let dist_goal = (len - state.arc_pos) / len;
    let dist_int = layout
        .next_intersection_distance(state.route, state.arc_pos)
        .expect("active aircraft stay within route bounds")
        .map(|(d, _)| d / len)
        .unwrap_or(1.0);
    [
        dist_goal,
        scaled_speed(state.speed, config),
        state.acceleration / config.envelope.accel_kts_per_s,
        dist_int,
        scaled_route(state.route, layout),
        0.5 * config.los_nmi / config.alert_nmi,
    ]
}

fn position_of(state: &AircraftState, layout: &SectorLayout) -> Point {
    layout
        .position(state.route, state.arc_pos)
        .expect("active aircraft stay within route bounds")
}

/// Build the fixed-length observation: the `n_closest` eligible aircraft by
/// planar separation fill the slots nearest-first (ties broken by lower
/// aircraft id); remaining slots carry the sentinel padding.
pub fn build_observation(
    ownship: &AircraftState,
    eligible: &[&AircraftState],
    config: &ScenarioConfig,
    layout: &SectorLayout,
) -> ObservationVector {
    let own_pos = position_of(ownship, layout);
    let own_len = layout.route(ownship.route).expect("route exists").length();

    let mut ranked: Vec<(f64, &AircraftState)> = eligible
        .iter()
        .map(|other| (euclidean_separation(own_pos, position_of(other, layout)), *other))
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.id.cmp(&b.1.id)));

    let mut features = Vec::with_capacity(ObservationVector::expected_len(config.n_closest));
    features.extend_from_slice(&aircraft_block(ownship, config, layout));
    for slot in 0..config.n_closest {
        match ranked.get(slot) {
            Some(&(d, other)) => {
                features.push(d / own_len);
                features.push(config.los_nmi / config.alert_nmi);
                features.extend_from_slice(&aircraft_block(other, config, layout));
            }
            None => {
                features.push(1.0);
                features.push(0.0);
                features.extend_from_slice(&[0.0; OWNSHIP_BLOCK_LEN]);
            }
        }
    }
    ObservationVector { features, n_closest: config.n_closest }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::AircraftId;
    use crate::env::test_fixtures::{crossing_config, merge_config};
    use crate::geometry::RouteId;

    fn aircraft(id: usize, route: usize, arc: f64, speed: f64) -> AircraftState {
        let mut state = AircraftState::enter(AircraftId(id), RouteId(route), speed, 0.0);
        state.arc_pos = arc;
        state
    }

    #[test]
    fn same_route_always_included() {
        let config = crossing_config();
        let own = aircraft(0, 0, 10.0, 470.0);
        let traffic = vec![aircraft(1, 0, 190.0, 470.0), aircraft(2, 0, 0.0, 470.0)];
        let eligible = neighbor_filter(&own, &traffic, &config.layout);
        assert_eq!(eligible.len(), 2);
    }

    #[test]
    fn conflicting_route_excluded_once_past_shared_point() {
        let config = crossing_config();
        // Ownship on route 0; route 2 crosses it at arc 70 on route 2.
        let own = aircraft(0, 0, 10.0, 470.0);
        let before = aircraft(1, 2, 69.0, 470.0);
        let past = aircraft(2, 2, 70.5, 470.0);
        let at_point = aircraft(3, 2, 70.0, 470.0);
        let traffic = vec![before.clone(), past, at_point];
        let eligible = neighbor_filter(&own, &traffic, &config.layout);
        let ids: Vec<_> = eligible.iter().map(|a| a.id.0).collect();
        assert_eq!(ids, vec![1]);
    }

    #[test]
    fn non_conflicting_route_excluded() {
        let config = crossing_config();
        // Routes 0 and 1 are parallel in the crossing fixture.
        let own = aircraft(0, 0, 10.0, 470.0);
        let traffic = vec![aircraft(1, 1, 10.0, 470.0)];
        assert!(neighbor_filter(&own, &traffic, &config.layout).is_empty());
    }

    #[test]
    fn inactive_and_self_excluded() {
        let config = crossing_config();
        let own = aircraft(0, 0, 10.0, 470.0);
        let mut gone = aircraft(1, 0, 50.0, 470.0);
        gone.active = false;
        let traffic = vec![own.clone(), gone];
        assert!(neighbor_filter(&own, &traffic, &config.layout).is_empty());
    }

    #[test]
    fn empty_traffic_pads_every_slot() {
        let config = crossing_config();
        let own = aircraft(0, 0, 10.0, 470.0);
        let obs = build_observation(&own, &[], &config, &config.layout);
        assert_eq!(obs.len(), ObservationVector::expected_len(config.n_closest));
        for slot in 0..config.n_closest {
            let s = obs.slot(slot);
            assert_eq!(s[0], 1.0);
            assert_eq!(s[1], 0.0);
            assert!(s[2..].iter().all(|&f| f == 0.0));
        }
    }

    #[test]
    fn slots_filled_nearest_first() {
        let config = crossing_config();
        let own = aircraft(0, 0, 100.0, 470.0);
        let traffic: Vec<AircraftState> = [5.0f64, 40.0, 95.0, 120.0, 160.0]
            .iter()
            .enumerate()
            .map(|(i, &arc)| aircraft(i + 1, 0, arc, 470.0))
            .collect();
        let eligible: Vec<&AircraftState> = traffic.iter().collect();
        let obs = build_observation(&own, &eligible, &config, &config.layout);
        // Nearest three of |arc - 100|: 95 (5), 120 (20), 160 (60).
        let own_len = 200.0;
        let dists: Vec<f64> = (0..3).map(|i| obs.slot(i)[0] * own_len).collect();
        assert!((dists[0] - 5.0).abs() < 1e-9);
        assert!((dists[1] - 20.0).abs() < 1e-9);
        assert!((dists[2] - 60.0).abs() < 1e-9);
        assert!(dists[0] <= dists[1] && dists[1] <= dists[2]);
    }

    #[test]
    fn distance_ties_break_by_lower_id() {
        let config = crossing_config();
        let own = aircraft(0, 0, 100.0, 470.0);
        // Both 10 nmi away, one ahead and one behind; ids chosen out of order.
        let a7 = aircraft(7, 0, 110.0, 470.0);
        let a4 = aircraft(4, 0, 90.0, 470.0);
        let traffic = vec![a7.clone(), a4.clone()];
        let eligible: Vec<&AircraftState> = traffic.iter().collect();
        let obs = build_observation(&own, &eligible, &config, &config.layout);
        // Slot order is (id 4, id 7): the neighbor block's dist_goal feature
        // differs between the two (90 vs 110 along the route).
        let first_dist_goal = obs.slot(0)[2];
        assert!((first_dist_goal - (200.0 - 90.0) / 200.0).abs() < 1e-12);
    }

    #[test]
    fn los_feature_is_sum_of_half_los() {
        let config = merge_config();
        let own = aircraft(0, 0, 10.0, 470.0);
        let other = aircraft(1, 0, 30.0, 470.0);
        let traffic = vec![other];
        let eligible: Vec<&AircraftState> = traffic.iter().collect();
        let obs = build_observation(&own, &eligible, &config, &config.layout);
        let own_half = obs.ownship_block()[5];
        let neighbor_half = obs.slot(0)[7];
        assert!((obs.slot(0)[1] - (own_half + neighbor_half)).abs() < 1e-12);
    }

    #[test]
    fn observation_length_is_constant() {
        let config = crossing_config();
        let own = aircraft(0, 0, 100.0, 470.0);
        for count in 0..6 {
            let traffic: Vec<AircraftState> =
                (0..count).map(|i| aircraft(i + 1, 0, 10.0 * (i + 1) as f64, 470.0)).collect();
            let eligible: Vec<&AircraftState> = traffic.iter().collect();
            let obs = build_observation(&own, &eligible, &config, &config.layout);
            assert_eq!(obs.len(), 6 + config.n_closest * 8);
        }
    }

    #[test]
    fn past_all_intersections_reports_far_sentinel() {
        let config = crossing_config();
        let own = aircraft(0, 2, 150.0, 470.0); // past crossings at 70 and 130
        let obs = build_observation(&own, &[], &config, &config.layout);
        assert_eq!(obs.ownship_block()[3], 1.0);
        let before = aircraft(1, 2, 20.0, 470.0);
        let obs = build_observation(&before, &[], &config, &config.layout);
        assert!((obs.ownship_block()[3] - 50.0 / 200.0).abs() < 1e-12);
    }
}
