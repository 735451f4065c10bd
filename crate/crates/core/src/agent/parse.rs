use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::scenario::{Action, ContainerId, ItemId, Question};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse action at {}..{}: {message}", span.0, span.1)]
pub struct ParseError {
    /// Byte range in the input.
    pub span: (usize, usize),
    pub message: String,
}

fn err(span: (usize, usize), message: impl Into<String>) -> ParseError {
    ParseError {
        span,
        message: message.into(),
    }
}

/// Parses one action in canonical syntax:
///
/// ```text
/// move <location>      open <container>     take <item>
/// ask which            ask about <location>
/// ```
///
/// Case and surrounding whitespace are ignored, as are an `Action:` prefix
/// and a trailing period. `ask` alone means `ask which`. Several actions
/// (joined by `and`, `,` or `;`) and relative directions are rejected.
pub fn parse_action(input: &str) -> Result<Action, ParseError> {
    let mut start = input.len() - input.trim_start().len();
    let mut end = input.trim_end().len();
    if end <= start {
        return Err(err((0, input.len()), "empty action"));
    }
    if input[start..end].to_ascii_lowercase().starts_with("action:") {
        start += "action:".len();
        start += input[start..end].len() - input[start..end].trim_start().len();
    }
    if input[start..end].ends_with('.') {
        end -= 1;
        end = start + input[start..end].trim_end().len();
    }
    if end <= start {
        return Err(err((start, end), "empty action"));
    }
    let body = &input[start..end];
    if let Some(i) = body.find([',', ';']) {
        return Err(err((start + i, start + i + 1), "only one action per turn"));
    }

    // (offset, lowercased word)
    let mut words: Vec<(usize, String)> = Vec::new();
    let mut off = 0;
    for w in body.split(' ') {
        if !w.trim().is_empty() {
            let lead = w.len() - w.trim_start().len();
            words.push((start + off + lead, w.trim().to_ascii_lowercase()));
        }
        off += w.len() + 1;
    }
    let span_of = |k: usize| (words[k].0, words[k].0 + words[k].1.len());
    if let Some(k) = words.iter().position(|(_, w)| w == "and" || w == "then") {
        return Err(err(span_of(k), "only one action per turn"));
    }
    if let Some(k) = words
        .iter()
        .position(|(_, w)| w == "left" || w == "right")
    {
        return Err(err(
            span_of(k),
            "use a location index instead of a direction",
        ));
    }

    let verb = words[0].1.as_str();
    let arity = |n: usize| -> Result<(), ParseError> {
        if words.len() == n {
            Ok(())
        } else if words.len() < n {
            Err(err((start, end), alloc::format!("`{verb}` needs an argument")))
        } else {
            Err(err((words[n].0, end), "unexpected trailing input"))
        }
    };
    let index = |k: usize| -> Result<usize, ParseError> {
        let w = words[k].1.trim_start_matches("loc");
        w.parse()
            .map_err(|_| err(span_of(k), "expected a location index"))
    };
    match verb {
        "move" => {
            // `move to 2` is accepted as well
            if words.len() == 3 && words[1].1 == "to" {
                return Ok(Action::Move { to: index(2)? });
            }
            arity(2)?;
            Ok(Action::Move { to: index(1)? })
        }
        "open" => {
            arity(2)?;
            Ok(Action::Open {
                container: ContainerId::new(words[1].1.clone()),
            })
        }
        "take" => {
            arity(2)?;
            Ok(Action::Take {
                item: ItemId::new(words[1].1.clone()),
            })
        }
        "ask" => match words.get(1).map(|w| w.1.as_str()) {
            None => Ok(Action::ask()),
            Some("which") => {
                arity(2)?;
                Ok(Action::ask())
            }
            Some("about") => {
                arity(3)?;
                Ok(Action::Ask {
                    question: Question::AtLocation(index(2)?),
                })
            }
            Some(_) => Err(err(span_of(1), "expected `which` or `about <location>`")),
        },
        _ => Err(err(
            span_of(0),
            "expected one of move, open, take, ask",
        )),
    }
}

/// Finds the last `Action:` line of a ReAct-style reply and parses it. A
/// reply without such a line is parsed whole.
pub fn parse_reply(reply: &str) -> Result<Action, ParseError> {
    let mut offset = 0;
    let mut last = None;
    for line in reply.split('\n') {
        if line.trim_start().to_ascii_lowercase().starts_with("action:") {
            last = Some((offset, line));
        }
        offset += line.len() + 1;
    }
    match last {
        Some((at, line)) => parse_action(line).map_err(|e| ParseError {
            span: (e.span.0 + at, e.span.1 + at),
            message: e.message,
        }),
        None => parse_action(reply),
    }
}

/// The thought text preceding the last `Action:` line, if any.
pub fn reply_thought(reply: &str) -> Option<String> {
    let mut thought = None;
    for line in reply.lines() {
        let t = line.trim();
        if let Some(rest) = t.strip_prefix("Thought:") {
            thought = Some(rest.trim().to_string());
        }
    }
    thought
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_forms() {
        assert_eq!(parse_action("move 2").unwrap(), Action::Move { to: 2 });
        assert_eq!(parse_action("  Action: TAKE gold_shirt. ").unwrap(), Action::Take { item: "gold_shirt".into() });
        assert_eq!(parse_action("ask").unwrap(), Action::ask());
        assert_eq!(
            parse_action("ask about 1").unwrap(),
            Action::Ask {
                question: Question::AtLocation(1)
            }
        );
        assert_eq!(parse_action("open drawer").unwrap(), Action::Open { container: "drawer".into() });
    }

    #[test]
    fn display_round_trips() {
        for a in [
            Action::Move { to: 0 },
            Action::Open { container: "drawer".into() },
            Action::Take { item: "red_tie".into() },
            Action::ask(),
            Action::Ask { question: Question::AtLocation(2) },
        ] {
            assert_eq!(parse_action(&a.to_string()).unwrap(), a);
        }
    }

    #[test]
    fn rejects_multiple_actions() {
        let e = parse_action("move 0 and take red_tie").unwrap_err();
        assert_eq!(e.span, (7, 10));
        assert!(parse_action("move 0, take x").is_err());
    }

    #[test]
    fn rejects_directions() {
        let e = parse_action("Action: move left").unwrap_err();
        assert_eq!(e.span, (13, 17));
    }

    #[test]
    fn reply_uses_last_action_line() {
        let r = "Thought: the tie is hidden.\nAction: move 0\n";
        assert_eq!(parse_reply(r).unwrap(), Action::Move { to: 0 });
        assert_eq!(reply_thought(r).as_deref(), Some("the tie is hidden."));
        let e = parse_reply("Thought: x\nAction: jump").unwrap_err();
        assert_eq!(e.span, (19, 23));
    }
}
