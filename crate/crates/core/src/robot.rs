//! Six-command robot arm on a 2D grid.
//!
//! Moves clamp at the grid edge and impossible grasps or releases leave the
//! state unchanged; a misdecoded command never aborts the loop, it only
//! records a no-op in [`RobotState::last_action_effect`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paradigm::CommandId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RobotCommand {
    Left,
    Right,
    Forward,
    Back,
    Grasp,
    Release,
}

impl RobotCommand {
    pub const ALL: [RobotCommand; 6] = [
        RobotCommand::Left,
        RobotCommand::Right,
        RobotCommand::Forward,
        RobotCommand::Back,
        RobotCommand::Grasp,
        RobotCommand::Release,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RobotCommand::Left => "LEFT",
            RobotCommand::Right => "RIGHT",
            RobotCommand::Forward => "FORWARD",
            RobotCommand::Back => "BACK",
            RobotCommand::Grasp => "GRASP",
            RobotCommand::Release => "RELEASE",
        }
    }

    pub fn parse(s: &str) -> Option<RobotCommand> {
        RobotCommand::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s.trim()))
    }
}

impl From<CommandId> for RobotCommand {
    fn from(id: CommandId) -> Self {
        RobotCommand::ALL[id.index()]
    }
}

impl From<RobotCommand> for CommandId {
    fn from(c: RobotCommand) -> Self {
        let i = RobotCommand::ALL
            .iter()
            .position(|&x| x == c)
            .expect("listed");
        CommandId::new(i).expect("six commands")
    }
}

impl std::fmt::Display for RobotCommand {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
}

impl Cell {
    pub const fn new(x: i32, y: i32) -> Self {
        Cell { x, y }
    }

    pub fn manhattan(self, other: Cell) -> usize {
        ((self.x - other.x).abs() + (self.y - other.y).abs()) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectPosition {
    At(Cell),
    Held,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionEffect {
    Start,
    Applied,
    NoOp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RobotState {
    pub gripper: Cell,
    pub object: ObjectPosition,
    pub goal: Cell,
    /// Grid size (width, height).
    pub bounds: (i32, i32),
    pub last_action_effect: ActionEffect,
}

impl RobotState {
    pub fn holding(&self) -> bool {
        self.object == ObjectPosition::Held
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        (0..self.bounds.0).contains(&c.x) && (0..self.bounds.1).contains(&c.y)
    }

    /// Where the object is, following the gripper while held.
    pub fn object_cell(&self) -> Cell {
        match self.object {
            ObjectPosition::At(c) => c,
            ObjectPosition::Held => self.gripper,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bounds.0 < 1 || self.bounds.1 < 1 {
            return Err(Error::invalid("grid must be at least 1x1"));
        }
        if !self.in_bounds(self.gripper) {
            return Err(Error::invalid("gripper outside the grid"));
        }
        if !self.in_bounds(self.object_cell()) {
            return Err(Error::invalid("object outside the grid"));
        }
        if !self.in_bounds(self.goal) {
            return Err(Error::invalid("goal outside the grid"));
        }
        Ok(())
    }

    pub fn task_complete(&self) -> bool {
        self.object == ObjectPosition::At(self.goal)
    }

    /// Text picture of the grid, top row = largest y.
    /// `G` gripper, `o` object, `*` goal, `@` gripper holding the object.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for y in (0..self.bounds.1).rev() {
            for x in 0..self.bounds.0 {
                let c = Cell::new(x, y);
                let ch = if c == self.gripper {
                    if self.holding() {
                        '@'
                    } else {
                        'G'
                    }
                } else if self.object == ObjectPosition::At(c) {
                    'o'
                } else if c == self.goal {
                    '*'
                } else {
                    '.'
                };
                out.push(ch);
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub start: RobotState,
    pub description: String,
}

impl TaskSpec {
    pub fn new(start: RobotState, description: impl Into<String>) -> Result<Self> {
        start.validate()?;
        if start.object == ObjectPosition::At(start.goal) {
            return Err(Error::invalid("object already sits on the goal"));
        }
        Ok(TaskSpec {
            start,
            description: description.into(),
        })
    }

    /// Six-step pick and move on a 5x5 grid: the object is two cells to the
    /// right of the gripper and the goal two cells forward of the object.
    pub fn pick_and_move() -> Self {
        TaskSpec::new(
            RobotState {
                gripper: Cell::new(0, 0),
                object: ObjectPosition::At(Cell::new(2, 0)),
                goal: Cell::new(2, 2),
                bounds: (5, 5),
                last_action_effect: ActionEffect::Start,
            },
            "pick up the object two cells right, carry it two cells forward, put it down",
        )
        .expect("valid default task")
    }
}

pub fn apply(state: &RobotState, cmd: RobotCommand) -> RobotState {
    let mut next = *state;
    let (dx, dy) = match cmd {
        RobotCommand::Left => (-1, 0),
        RobotCommand::Right => (1, 0),
        RobotCommand::Forward => (0, 1),
        RobotCommand::Back => (0, -1),
        RobotCommand::Grasp => {
            let ok = state.object == ObjectPosition::At(state.gripper);
            if ok {
                next.object = ObjectPosition::Held;
            }
            next.last_action_effect = effect(ok);
            return next;
        }
        RobotCommand::Release => {
            let ok = state.holding();
            if ok {
                next.object = ObjectPosition::At(state.gripper);
            }
            next.last_action_effect = effect(ok);
            return next;
        }
    };
    let target = Cell::new(state.gripper.x + dx, state.gripper.y + dy);
    let ok = state.in_bounds(target);
    if ok {
        next.gripper = target;
    }
    next.last_action_effect = effect(ok);
    next
}

fn effect(applied: bool) -> ActionEffect {
    if applied {
        ActionEffect::Applied
    } else {
        ActionEffect::NoOp
    }
}

fn moves_between(from: Cell, to: Cell, out: &mut Vec<RobotCommand>) {
    let dx = to.x - from.x;
    let dy = to.y - from.y;
    let h = if dx > 0 {
        RobotCommand::Right
    } else {
        RobotCommand::Left
    };
    let v = if dy > 0 {
        RobotCommand::Forward
    } else {
        RobotCommand::Back
    };
    out.extend(std::iter::repeat_n(h, dx.unsigned_abs() as usize));
    out.extend(std::iter::repeat_n(v, dy.unsigned_abs() as usize));
}

/// Shortest script: walk to the object (x axis first), grasp, walk to the
/// goal, release.
pub fn optimal_script(task: &TaskSpec) -> Result<Vec<RobotCommand>> {
    let s = &task.start;
    s.validate()
        .map_err(|e| Error::invalid(format!("unreachable task: {e}")))?;
    let mut script = Vec::new();
    let pickup = match s.object {
        ObjectPosition::At(c) => {
            moves_between(s.gripper, c, &mut script);
            script.push(RobotCommand::Grasp);
            c
        }
        ObjectPosition::Held => s.gripper,
    };
    moves_between(pickup, s.goal, &mut script);
    script.push(RobotCommand::Release);
    Ok(script)
}

/// States after each command (the start state first) and whether the
/// object ends on the goal with the gripper open.
pub fn run_task(task: &TaskSpec, commands: &[RobotCommand]) -> (Vec<RobotState>, bool) {
    let mut trace = Vec::with_capacity(commands.len() + 1);
    trace.push(task.start);
    let mut state = task.start;
    for &c in commands {
        state = apply(&state, c);
        trace.push(state);
    }
    (trace, state.task_complete())
}

#[cfg(test)]
mod tests {
    use super::*;
    use RobotCommand::*;

    #[test]
    fn clamps_at_edge() {
        let s = TaskSpec::pick_and_move().start;
        let n = apply(&s, Left);
        assert_eq!(n.gripper, Cell::new(0, 0));
        assert_eq!(n.last_action_effect, ActionEffect::NoOp);
        let n = apply(&s, Back);
        assert_eq!(n.last_action_effect, ActionEffect::NoOp);
    }

    #[test]
    fn grasp_requires_object_under_gripper() {
        let s = TaskSpec::pick_and_move().start;
        assert_eq!(apply(&s, Grasp).last_action_effect, ActionEffect::NoOp);
        let on = RobotState {
            gripper: Cell::new(2, 0),
            ..s
        };
        let g = apply(&on, Grasp);
        assert!(g.holding());
        assert_eq!(apply(&g, Grasp).last_action_effect, ActionEffect::NoOp);
        assert_eq!(apply(&s, Release).last_action_effect, ActionEffect::NoOp);
    }

    #[test]
    fn held_object_travels() {
        let s = RobotState {
            gripper: Cell::new(2, 0),
            ..TaskSpec::pick_and_move().start
        };
        let s = apply(&apply(&s, Grasp), Forward);
        assert_eq!(s.object_cell(), Cell::new(2, 1));
        let s = apply(&s, Release);
        assert_eq!(s.object, ObjectPosition::At(Cell::new(2, 1)));
    }

    #[test]
    fn hand_traced_six_steps() {
        let task = TaskSpec::pick_and_move();
        let (trace, ok) = run_task(&task, &[Right, Right, Grasp, Forward, Forward, Release]);
        assert!(ok);
        let last = trace.last().unwrap();
        assert_eq!(last.object, ObjectPosition::At(Cell::new(2, 2)));
        assert!(!last.holding());
        assert_eq!(trace.len(), 7);
    }

    #[test]
    fn default_script_is_six_steps() {
        let s = optimal_script(&TaskSpec::pick_and_move()).unwrap();
        assert_eq!(s, vec![Right, Right, Grasp, Forward, Forward, Release]);
    }

    #[test]
    fn minimal_script() {
        let task = TaskSpec::new(
            RobotState {
                gripper: Cell::new(1, 1),
                object: ObjectPosition::At(Cell::new(1, 1)),
                goal: Cell::new(1, 2),
                bounds: (3, 3),
                last_action_effect: ActionEffect::Start,
            },
            "",
        )
        .unwrap();
        assert_eq!(
            optimal_script(&task).unwrap(),
            vec![Grasp, Forward, Release]
        );
    }

    #[test]
    fn empty_commands_fail() {
        assert!(!run_task(&TaskSpec::pick_and_move(), &[]).1);
    }

    #[test]
    fn invalid_tasks_rejected() {
        let mut s = TaskSpec::pick_and_move().start;
        s.goal = Cell::new(9, 9);
        assert!(TaskSpec::new(s, "").is_err());
        let mut s = TaskSpec::pick_and_move().start;
        s.goal = Cell::new(2, 0);
        assert!(TaskSpec::new(s, "").is_err());
        let bad = TaskSpec {
            start: RobotState {
                goal: Cell::new(-1, 0),
                ..TaskSpec::pick_and_move().start
            },
            description: String::new(),
        };
        assert!(optimal_script(&bad).is_err());
    }

    #[test]
    fn command_id_mapping_is_bijective() {
        for id in CommandId::all() {
            assert_eq!(CommandId::from(RobotCommand::from(id)), id);
        }
        assert_eq!(RobotCommand::parse("grasp"), Some(Grasp));
        assert_eq!(RobotCommand::parse("jump"), None);
    }

    #[test]
    fn render_marks_cells() {
        let r = TaskSpec::pick_and_move().start.render();
        let rows: Vec<&str> = r.lines().collect();
        assert_eq!(rows.len(), 5);
        assert_eq!(rows[4], "G.o..");
        assert_eq!(rows[2], "..*..");
    }
}
