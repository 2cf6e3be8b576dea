//! Runs the pick-and-move task with the shortest script, then with one
//! wrong command.

use tactile_bci::robot::{optimal_script, run_task, RobotCommand, TaskSpec};

fn main() -> tactile_bci::Result<()> {
    let task = TaskSpec::pick_and_move();
    println!("{}", task.description);
    let script = optimal_script(&task)?;
    let (trace, ok) = run_task(&task, &script);
    for (cmd, state) in script.iter().zip(&trace[1..]) {
        println!("{cmd}:\n{}", state.render());
    }
    println!("complete: {ok}\n");

    let mut wrong = script.clone();
    wrong[3] = RobotCommand::Back;
    let (trace, ok) = run_task(&task, &wrong);
    print!("{}", trace.last().unwrap().render());
    println!(
        "with {:?}: complete {ok}",
        wrong.iter().map(|c| c.name()).collect::<Vec<_>>()
    );
    Ok(())
}
