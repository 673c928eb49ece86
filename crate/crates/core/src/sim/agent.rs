use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use super::Kinematics;
use crate::geometry::{normalize_angle, Pose2};

/// Discrete steering command. `alpha` is signed, deg/s²; positive steers right.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Action {
    Noop,
    Turn { alpha: f64 },
}

impl Action {
    /// `TURN(sign * alpha)`, or NOOP for a zero sign.
    pub fn turn_sign(sign: i8, alpha: f64) -> Self {
        match sign.signum() {
            0 => Action::Noop,
            s => Action::Turn {
                alpha: s as f64 * alpha,
            },
        }
    }

    pub fn alpha(&self) -> f64 {
        match *self {
            Action::Noop => 0.0,
            Action::Turn { alpha } => alpha,
        }
    }

    pub fn sign(&self) -> i8 {
        match *self {
            Action::Turn { alpha } if alpha > 0.0 => 1,
            Action::Turn { alpha } if alpha < 0.0 => -1,
            _ => 0,
        }
    }
}

/// Agent pose plus angular velocity `omega` (deg/s, positive = clockwise).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub pose: Pose2<f64>,
    pub omega: f64,
    pub speed: f64,
}

/// Heading change (deg) over `dt` for `omega` ramping at `rate` and saturating at `limit`.
fn swept_angle(omega0: f64, rate: f64, limit: f64, dt: f64) -> (f64, f64) {
    let unclamped = omega0 + rate * dt;
    let omega1 = unclamped.clamp(-limit, limit);
    if rate == 0.0 || unclamped == omega1 {
        return (omega1, 0.5 * (omega0 + omega1) * dt);
    }
    let tau = ((omega1 - omega0) / rate).clamp(0.0, dt);
    let angle = omega0 * tau + 0.5 * rate * tau * tau + omega1 * (dt - tau);
    (omega1, angle)
}

/// Advances the agent by one step.
///
/// TURN applies `omega += alpha * kappa * dt` (clamped to `omega_max`) with the
/// heading integrated exactly under the linear ramp. NOOP zeroes `omega` so the
/// agent drives straight. The position then moves `speed * dt` along the new heading.
pub fn apply_action(agent: &AgentState, action: Action, kin: &Kinematics, dt: f64) -> AgentState {
    let (omega, swept_deg) = match action {
        Action::Noop => (0.0, 0.0),
        Action::Turn { alpha } => {
            let omega0 = agent.omega.clamp(-kin.omega_max, kin.omega_max);
            swept_angle(omega0, alpha * kin.kappa, kin.omega_max, dt)
        }
    };
    let heading = normalize_angle(agent.pose.heading - swept_deg.to_radians());
    let step = agent.speed * dt;
    let position = agent.pose.position + Vector2::new(heading.cos(), heading.sin()) * step;
    AgentState {
        pose: Pose2 { position, heading },
        omega,
        speed: agent.speed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn agent(omega: f64) -> AgentState {
        AgentState {
            pose: Pose2::new(0.0, 0.0, 0.0),
            omega,
            speed: 6.0,
        }
    }

    #[test]
    fn single_turn_increment() {
        let kin = Kinematics::default();
        let next = apply_action(&agent(0.0), Action::Turn { alpha: 35.0 }, &kin, 0.1);
        assert_eq!(next.omega, 7.0);
        // rightward turn lowers the CCW heading
        assert!(next.pose.heading < 0.0);
    }

    #[test]
    fn noop_resets_omega_and_keeps_heading() {
        let kin = Kinematics::default();
        let mut a = agent(20.0);
        a.pose.heading = 0.4;
        let next = apply_action(&a, Action::Noop, &kin, 0.05);
        assert_eq!(next.omega, 0.0);
        assert_eq!(next.pose.heading, 0.4);
    }

    #[test]
    fn omega_saturates() {
        let kin = Kinematics::default();
        let mut a = agent(0.0);
        for _ in 0..200 {
            a = apply_action(&a, Action::Turn { alpha: -35.0 }, &kin, 0.05);
            assert!(a.omega.abs() <= kin.omega_max);
        }
        assert_eq!(a.omega, -90.0);
    }

    /// Fine-step reference: omega ramps continuously, heading by forward Euler.
    fn reference_heading_deg(alpha: f64, kin: &Kinematics, total: f64, dt: f64) -> f64 {
        let n = (total / dt).round() as usize;
        let (mut omega, mut heading) = (0.0f64, 0.0f64);
        for _ in 0..n {
            omega = (omega + alpha * kin.kappa * dt).clamp(-kin.omega_max, kin.omega_max);
            heading -= omega * dt;
        }
        heading
    }

    #[test]
    fn turn_stream_matches_fine_integrator() {
        let kin = Kinematics::default();
        let dt = 0.05;
        let mut a = agent(0.0);
        for _ in 0..20 {
            a = apply_action(&a, Action::Turn { alpha: 35.0 }, &kin, dt);
        }
        assert!((a.omega - 70.0).abs() < 1e-9);
        let reference = reference_heading_deg(35.0, &kin, 1.0, dt / 100.0);
        assert!((a.pose.heading.to_degrees() - reference).abs() < 0.5);
        // through the clamp as well
        let mut b = agent(0.0);
        for _ in 0..60 {
            b = apply_action(&b, Action::Turn { alpha: 35.0 }, &kin, dt);
        }
        let reference = reference_heading_deg(35.0, &kin, 3.0, dt / 100.0);
        let got = b.pose.heading.to_degrees();
        let diff = crate::geometry::normalize_angle((got - reference).to_radians()).to_degrees();
        assert!(diff.abs() < 0.5, "{got} vs {reference}");
    }

    #[test]
    fn constant_speed() {
        let kin = Kinematics::default();
        let mut a = agent(0.0);
        for i in 0..50 {
            let act = if i % 3 == 0 {
                Action::Noop
            } else {
                Action::Turn { alpha: 35.0 }
            };
            let next = apply_action(&a, act, &kin, 0.05);
            let d = (next.pose.position - a.pose.position).norm();
            assert!((d - 0.3).abs() < 1e-12);
            a = next;
        }
    }

    #[test]
    fn turn_sign_helper() {
        assert_eq!(Action::turn_sign(0, 35.0), Action::Noop);
        assert_eq!(Action::turn_sign(-1, 35.0), Action::Turn { alpha: -35.0 });
        assert_eq!(Action::Turn { alpha: 35.0 }.sign(), 1);
    }
}
