//! Episode trace rows for offline analysis of single runs.

use crate::dynamics::{AircraftId, SpeedCommand};
use crate::geometry::RouteId;

/// Version tag written as the first line of a trace file.
pub const TRACE_FORMAT: &str = "# enroute-trace-csv v1";
pub const TRACE_HEADER: &str =
    "time_s,aircraft,route,arc_pos_nmi,speed_kts,action,reward,min_separation_nmi";

/// One aircraft at one decision epoch.
#[derive(Debug, Clone)]
pub struct TraceRow {
    pub time_s: f64,
    pub aircraft: AircraftId,
    pub route: RouteId,
    pub arc_pos_nmi: f64,
    pub speed_kts: f64,
    pub action: SpeedCommand,
    pub reward: f64,
    /// Empty when the aircraft is alone in the sector.
    pub min_separation_nmi: Option<f64>,
}

impl TraceRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.time_s,
            self.aircraft.0,
            self.route.0,
            self.arc_pos_nmi,
            self.speed_kts,
            self.action.name(),
            self.reward,
            self.min_separation_nmi.map(|d| d.to_string()).unwrap_or_default(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_are_schema_stable() {
        let row = TraceRow {
            time_s: 12.0,
            aircraft: AircraftId(3),
            route: RouteId(1),
            arc_pos_nmi: 1.6,
            speed_kts: 470.0,
            action: SpeedCommand::Hold,
            reward: -0.075,
            min_separation_nmi: Some(5.0),
        };
        assert_eq!(row.to_csv(), "12,3,1,1.6,470,hold,-0.075,5");
        assert_eq!(TRACE_HEADER.split(',').count(), 8);
        let alone = TraceRow { min_separation_nmi: None, ..row };
        assert!(alone.to_csv().ends_with(','));
    }
}
