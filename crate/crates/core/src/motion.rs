//! Low-level motion. The planner only hands out goal points; how a robot
//! moves toward them is up to a [`MotionController`].

use crate::geometry::Point2;

/// Advances a robot one time step toward a goal.
///
/// Implementations must return finite positions for finite inputs.
pub trait MotionController {
    fn step(&self, current: Point2, goal: Point2) -> Point2;

    /// Largest distance covered in one step, if bounded.
    fn max_step(&self) -> Option<f64> {
        None
    }
}

/// Maximum speed and time step of a first-order (velocity-controlled) robot.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FirstOrderParams {
    pub u_max: f64,
    pub dt: f64,
}

impl FirstOrderParams {
    pub fn new(u_max: f64, dt: f64) -> Option<Self> {
        (u_max > 0.0 && u_max.is_finite() && dt > 0.0 && dt.is_finite()).then_some(Self { u_max, dt })
    }

    pub fn reach(&self) -> f64 {
        self.u_max * self.dt
    }
}

/// `x_{t+1} = x_t + u_max Δt (g − x_t)/‖g − x_t‖`, landing exactly on the
/// goal when it is within one step.
pub fn first_order_step(current: Point2, goal: Point2, params: &FirstOrderParams) -> Point2 {
    let d = current.dist(goal);
    let reach = params.reach();
    if d <= reach {
        goal
    } else {
        current + (goal - current) * (reach / d)
    }
}

/// [`MotionController`] wrapper around [`first_order_step`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FirstOrder(pub FirstOrderParams);

impl MotionController for FirstOrder {
    fn step(&self, current: Point2, goal: Point2) -> Point2 {
        first_order_step(current, goal, &self.0)
    }

    fn max_step(&self) -> Option<f64> {
        Some(self.0.reach())
    }
}
