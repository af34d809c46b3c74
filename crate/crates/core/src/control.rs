//! Bang-bang tarsal actuation and the static foot force model.
//!
//! Artificial turf is the GRASS class, so it deploys the tarsal segments
//! along with the granular and soft terrains.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::TerrainClass;

pub const DEPLOYED_ANGLE_DEG: f64 = -15.0;
pub const PASSIVE_ANGLE_DEG: f64 = 10.0;
pub const DEPLOYED_AREA_FACTOR: f64 = 3.92;
pub const PASSIVE_AREA_FACTOR: f64 = 1.0;
pub const DEPLOYED_SERVO_DEG: f64 = 360.0;
pub const PASSIVE_SERVO_DEG: f64 = 0.0;
/// Servo stall torque, kg-cm.
pub const MAX_SERVO_TORQUE_KGCM: f64 = 22.8;
/// Stabilizing force at stall torque, N.
pub const MAX_STABILIZING_FORCE_N: f64 = 447.0;
/// Roll angle at which the whole load has moved to one side.
pub const FULL_TRANSFER_ROLL_DEG: f64 = 15.0;

/// Terrains on which the tarsal segments are deployed.
pub const DESTABILIZING: [TerrainClass; 6] = [
    TerrainClass::Poppy,
    TerrainClass::Gravel,
    TerrainClass::Straw,
    TerrainClass::Grass,
    TerrainClass::Foam,
    TerrainClass::Carpet,
];

pub fn is_destabilizing(label: TerrainClass) -> bool {
    DESTABILIZING.contains(&label)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Action {
    Deploy,
    Retract,
}

impl Action {
    pub fn name(self) -> &'static str {
        match self {
            Action::Deploy => "DEPLOY",
            Action::Retract => "RETRACT",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActuationCommand {
    pub action: Action,
    pub cause: TerrainClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FootState {
    pub tarsal_angle_deg: f64,
    pub servo_angle_deg: f64,
    pub deployed: bool,
    pub contact_area_factor: f64,
}

impl FootState {
    pub const PASSIVE: FootState = FootState {
        tarsal_angle_deg: PASSIVE_ANGLE_DEG,
        servo_angle_deg: PASSIVE_SERVO_DEG,
        deployed: false,
        contact_area_factor: PASSIVE_AREA_FACTOR,
    };
    pub const DEPLOYED: FootState = FootState {
        tarsal_angle_deg: DEPLOYED_ANGLE_DEG,
        servo_angle_deg: DEPLOYED_SERVO_DEG,
        deployed: true,
        contact_area_factor: DEPLOYED_AREA_FACTOR,
    };

    /// True for the two states the controller can reach.
    pub fn is_valid(&self) -> bool {
        *self == Self::PASSIVE || *self == Self::DEPLOYED
    }
}

impl Default for FootState {
    fn default() -> Self {
        Self::PASSIVE
    }
}

pub fn decide(label: TerrainClass) -> ActuationCommand {
    let action = if is_destabilizing(label) { Action::Deploy } else { Action::Retract };
    ActuationCommand { action, cause: label }
}

/// Next foot state. The previous state is irrelevant: the controller always
/// drives fully to one of its two positions.
pub fn apply(_state: FootState, cmd: ActuationCommand) -> FootState {
    match cmd.action {
        Action::Deploy => FootState::DEPLOYED,
        Action::Retract => FootState::PASSIVE,
    }
}

/// Stabilizing force delivered by the linkage for a servo torque in kg-cm.
pub fn stabilizing_force(servo_torque_kgcm: f64) -> Result<f64> {
    if !(0.0..=MAX_SERVO_TORQUE_KGCM).contains(&servo_torque_kgcm) {
        return Err(Error::InvalidParameter(alloc::format!(
            "servo torque {servo_torque_kgcm} kg-cm outside [0, {MAX_SERVO_TORQUE_KGCM}]"
        )));
    }
    Ok(servo_torque_kgcm / MAX_SERVO_TORQUE_KGCM * MAX_STABILIZING_FORCE_N)
}

/// Split `total` newtons between the left and right tarsal segments for a
/// body roll in degrees (positive rolls toward the right side).
pub fn force_split(total: f64, roll_deg: f64) -> Result<(f64, f64)> {
    if !(total.is_finite() && total >= 0.0) {
        return Err(Error::InvalidParameter(alloc::format!("total force must be non-negative, got {total}")));
    }
    if roll_deg.is_nan() {
        return Err(Error::NonFinite("roll angle"));
    }
    let share = 0.5 + 0.5 * (roll_deg / FULL_TRANSFER_ROLL_DEG).clamp(-1.0, 1.0);
    let right = total * share;
    Ok((total - right, right))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decide_examples() {
        assert_eq!(decide(TerrainClass::Gravel).action, Action::Deploy);
        assert_eq!(decide(TerrainClass::Metal).action, Action::Retract);
        assert_eq!(decide(TerrainClass::Grass).action, Action::Deploy);
        assert_eq!(decide(TerrainClass::Mat).cause, TerrainClass::Mat);
    }

    #[test]
    fn apply_toggles_between_two_states() {
        let deploy = decide(TerrainClass::Foam);
        let retract = decide(TerrainClass::Wood);
        let s = apply(FootState::default(), deploy);
        assert_eq!(s, FootState::DEPLOYED);
        assert_eq!(apply(s, deploy), s);
        let r = apply(s, retract);
        assert_eq!(r.tarsal_angle_deg, 10.0);
        assert_eq!(r.contact_area_factor, 1.0);
        assert!(r.is_valid() && s.is_valid());
    }

    #[test]
    fn force_model_examples() {
        assert_eq!(stabilizing_force(22.8).unwrap(), 447.0);
        assert_eq!(stabilizing_force(0.0).unwrap(), 0.0);
        assert_eq!(stabilizing_force(11.4).unwrap(), 223.5);
        assert!(stabilizing_force(22.9).is_err());
        assert!(stabilizing_force(-0.1).is_err());
        assert_eq!(force_split(447.0, 0.0).unwrap(), (223.5, 223.5));
        assert_eq!(force_split(447.0, 15.0).unwrap(), (0.0, 447.0));
        assert_eq!(force_split(447.0, 40.0).unwrap(), (0.0, 447.0));
        assert_eq!(force_split(447.0, -20.0).unwrap(), (447.0, 0.0));
        assert_eq!(force_split(0.0, 7.0).unwrap(), (0.0, 0.0));
        assert!(force_split(-1.0, 0.0).is_err());
    }
}
