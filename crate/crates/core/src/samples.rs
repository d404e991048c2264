//! Example projects shipped with the tool, plus two lint fixtures.

use crate::program::{Arg, Block, Category, Opcode, Program, Script, Sprite, Variable};

fn say(arg: impl Into<Arg>) -> Block {
    Block::new(Opcode::Say).arg(arg)
}

fn ask(question: &str) -> Block {
    Block::new(Opcode::Ask).arg(question)
}

fn answer() -> Block {
    Block::new(Opcode::Answer)
}

fn viewer() -> Block {
    Block::new(Opcode::CommViewerUsername)
}

fn foreach(relation: &str, who: impl Into<Arg>, body: Vec<Block>) -> Block {
    Block::new(Opcode::CommForeach).field("relation", relation).arg(who).body(body)
}

fn project(field: &str) -> Block {
    Block::new(Opcode::CommProjectMeta).field("field", field)
}

fn user(field: &str) -> Block {
    Block::new(Opcode::CommUserMeta).field("field", field)
}

fn var(name: &str) -> Block {
    Block::new(Opcode::Var).field("var", name)
}

fn set(name: &str, value: impl Into<Arg>) -> Block {
    Block::new(Opcode::SetVar).field("var", name).arg(value)
}

fn change(name: &str, by: impl Into<Arg>) -> Block {
    Block::new(Opcode::ChangeVar).field("var", name).arg(by)
}

fn op2(op: Opcode, a: impl Into<Arg>, b: impl Into<Arg>) -> Block {
    Block::new(op).arg(a).arg(b)
}

fn length(of: impl Into<Arg>) -> Block {
    Block::new(Opcode::LengthOf).arg(of)
}

fn when_if(cond: Block, body: Vec<Block>) -> Block {
    Block::new(Opcode::If).arg(cond).body(body)
}

/// Say the title of every project shared by a prompted user, on the space key.
pub fn shared_titles() -> Program {
    Program {
        sprites: vec![Sprite {
            name: "Cat".into(),
            variables: vec![],
            scripts: vec![Script {
                hat: Block::new(Opcode::WhenKeyPressed).field("key", "space"),
                body: vec![ask("Whose projects?"), foreach("shared", answer(), vec![say(project("title"))])],
            }],
        }],
        cloud_project_id: None,
    }
}

/// Followers of a prompted user who live in Spain.
pub fn spain_followers() -> Program {
    Program::single(
        "Globe",
        vec![],
        vec![
            ask("Whose followers?"),
            foreach(
                "followers",
                answer(),
                vec![when_if(op2(Opcode::Eq, user("country"), "Spain"), vec![say(user("username"))])],
            ),
        ],
    )
}

/// The viewer's own projects that use sound blocks.
pub fn my_sound_projects() -> Program {
    let uses_sound = Block::new(Opcode::CommProjectUsesCategory).field("category", "sound");
    Program::single(
        "Speaker",
        vec![],
        vec![foreach("shared", viewer(), vec![when_if(uses_sound, vec![say(project("title"))])])],
    )
}

/// Sound projects favorited by the people the viewer follows.
pub fn sound_recommender() -> Program {
    let uses_sound = Block::new(Opcode::CommProjectUsesCategory).field("category", "sound");
    Program::single(
        "Radio",
        vec![],
        vec![foreach(
            "following",
            viewer(),
            vec![foreach("favorited", user("username"), vec![when_if(uses_sound, vec![say(project("title"))])])],
        )],
    )
}

/// Adds the viewer's `about` to `talk` once, from inside a user loop where
/// the current user is the viewer.
fn count_about_if_viewer() -> Block {
    let is_viewer = op2(Opcode::And, op2(Opcode::Eq, var("found"), 0.0), op2(Opcode::Eq, user("username"), viewer()));
    when_if(is_viewer, vec![change("talk", length(user("about"))), set("found", 1.0)])
}

/// Total length of the viewer's project titles and descriptions, username and about text.
///
/// The viewer's profile is only reachable inside a user loop, so it is looked
/// up among the followers of the viewer's followees, then among the followees
/// of the viewer's followers.
pub fn talkative() -> Program {
    Program::single(
        "Parrot",
        vec![Variable::local("talk", 0.0), Variable::local("found", 0.0)],
        vec![
            set("talk", 0.0),
            set("found", 0.0),
            foreach(
                "shared",
                viewer(),
                vec![change("talk", op2(Opcode::Add, length(project("title")), length(project("description"))))],
            ),
            change("talk", length(viewer())),
            foreach("following", viewer(), vec![foreach("followers", user("username"), vec![count_about_if_viewer()])]),
            when_if(
                op2(Opcode::Eq, var("found"), 0.0),
                vec![foreach(
                    "followers",
                    viewer(),
                    vec![foreach("following", user("username"), vec![count_about_if_viewer()])],
                )],
            ),
        ],
    )
}

fn sum(mut terms: Vec<Block>) -> Arg {
    let Some(first) = terms.pop() else { return Arg::from(0.0) };
    terms.into_iter().rev().fold(Arg::Block(first), |acc, t| Arg::Block(op2(Opcode::Add, t, acc)))
}

/// Share of each block category across all projects of a prompted user.
///
/// Fractions are divided by the user's own block total so they always add up to 1.
pub fn doughnut_data() -> Program {
    let mut variables: Vec<Variable> = Category::ALL.iter().map(|c| Variable::local(c.name(), 0.0)).collect();
    variables.push(Variable::local("total", 0.0));

    let mut body = vec![ask("Whose blocks?")];
    body.extend(Category::ALL.iter().map(|c| set(c.name(), 0.0)));
    let per_project = Category::ALL
        .iter()
        .map(|c| {
            let counts =
                c.opcodes().map(|op| Block::new(Opcode::CommProjectBlockCount).field("opcode", op.name())).collect();
            change(c.name(), sum(counts))
        })
        .collect();
    body.push(foreach("shared", answer(), per_project));
    body.push(set("total", sum(Category::ALL.iter().map(|c| var(c.name())).collect())));
    let slices = Category::ALL
        .iter()
        .map(|c| {
            let label = op2(Opcode::Join, format!("{} ", c.name()), op2(Opcode::Div, var(c.name()), var("total")));
            when_if(op2(Opcode::Gt, var(c.name()), 0.0), vec![say(label)])
        })
        .collect();
    body.push(
        Block::new(Opcode::IfElse)
            .arg(op2(Opcode::Eq, var("total"), 0.0))
            .body(vec![say("no blocks")])
            .else_body(slices),
    );
    Program::single("Chart", variables, body)
}

/// Cloud counters of love-its and favorites over every viewer's shared projects.
pub fn loveits_vs_favorites() -> Program {
    let mut p = Program::single(
        "Counter",
        vec![Variable::cloud("total loves"), Variable::cloud("total favorites")],
        vec![
            foreach(
                "shared",
                viewer(),
                vec![change("total loves", project("loves")), change("total favorites", project("favorites"))],
            ),
            say(var("total loves")),
            say(var("total favorites")),
        ],
    );
    p.cloud_project_id = Some(1);
    p
}

/// A user accessor with no enclosing user loop.
pub fn misconception1() -> Program {
    Program::single("Cat", vec![], vec![say(op2(Opcode::Join, "Your country: ", user("country")))])
}

/// A community total read on every iteration of a loop.
pub fn stats_in_loop() -> Program {
    Program::single(
        "Cat",
        vec![],
        vec![Block::new(Opcode::Repeat)
            .arg(10.0)
            .body(vec![say(Block::new(Opcode::CommTotal).field("kind", "projects"))])],
    )
}

/// The shipped example projects as `(file stem, program)`.
pub fn examples() -> Vec<(&'static str, Program)> {
    vec![
        ("fig1", shared_titles()),
        ("spain_followers", spain_followers()),
        ("my_sound_projects", my_sound_projects()),
        ("sound_recommender", sound_recommender()),
        ("talkative", talkative()),
        ("doughnut_data", doughnut_data()),
        ("loveits_vs_favorites", loveits_vs_favorites()),
    ]
}

/// Programs that exercise the linter, as `(file stem, program)`.
pub fn lint_fixtures() -> Vec<(&'static str, Program)> {
    vec![("misconception1", misconception1()), ("stats_in_loop", stats_in_loop())]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::{lint, validate, Rule};

    #[test]
    fn examples_are_valid_and_lint_clean() {
        for (name, p) in examples() {
            validate(&p).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(lint(&p), vec![], "{name}");
        }
    }

    #[test]
    fn lint_fixtures_trip_one_rule_each() {
        let rules = |p: &Program| lint(p).iter().map(|d| d.rule).collect::<Vec<_>>();
        assert_eq!(rules(&misconception1()), [Rule::L1]);
        assert_eq!(rules(&stats_in_loop()), [Rule::L2]);
    }
}
