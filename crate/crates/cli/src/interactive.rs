use std::io::{BufRead, Write};

use anyhow::{bail, Result};
use dq_core::registry::Dimension;
use dq_core::selection::{select_all, Answer, Mode, Unanswered, UseCaseProfile};

fn ask_line<R: BufRead, W: Write>(input: &mut R, output: &mut W, prompt: &str) -> Result<String> {
    write!(output, "{prompt}")?;
    output.flush()?;
    let mut line = String::new();
    if input.read_line(&mut line)? == 0 {
        bail!("input ended before the questionnaire was complete");
    }
    Ok(line.trim().to_string())
}

/// Option numbers ("1 3", "1,3") or one exact label.
fn parse_choice(line: &str, options: &[String]) -> Option<Vec<String>> {
    if let Some(o) = options.iter().find(|o| o.as_str() == line) {
        return Some(vec![o.clone()]);
    }
    let mut picked = Vec::new();
    for tok in line.split([',', ' ']).filter(|t| !t.is_empty()) {
        let i: usize = tok.parse().ok()?;
        let o = options.get(i.checked_sub(1)?)?;
        if !picked.contains(o) {
            picked.push(o.clone());
        }
    }
    (!picked.is_empty()).then_some(picked)
}

fn ask_question<R: BufRead, W: Write>(input: &mut R, output: &mut W, q: &Unanswered) -> Result<Answer> {
    writeln!(output, "  {}", q.text)?;
    for (i, o) in q.options.iter().enumerate() {
        writeln!(output, "    {}) {o}", i + 1)?;
    }
    loop {
        let line = ask_line(input, output, "  > ")?;
        match parse_choice(&line, &q.options) {
            Some(mut v) if v.len() == 1 => return Ok(Answer::One(v.remove(0))),
            Some(v) => return Ok(Answer::Many(v)),
            None => writeln!(output, "  invalid answer `{line}`; valid: {}", q.options.join(" | "))?,
        }
    }
}

/// Walk every dimension, asking whether it is relevant and then each of
/// its tree questions. Answers are stored per dimension.
pub fn interactive_profile<R: BufRead, W: Write>(input: &mut R, output: &mut W) -> Result<UseCaseProfile> {
    let mut profile = UseCaseProfile::default();
    let mut relevant = Vec::new();
    for d in Dimension::report_order() {
        writeln!(output, "\n{} ({})", d.title(), d.cluster().title())?;
        let yes = loop {
            match ask_line(input, output, "  relevant for this use case? [y/n] ")?.to_ascii_lowercase().as_str() {
                "y" | "yes" => break true,
                "n" | "no" => break false,
                _ => writeln!(output, "  please answer y or n")?,
            }
        };
        if !yes {
            continue;
        }
        relevant.push(d);
        loop {
            let mut probe = profile.clone();
            probe.dimensions = Some(vec![d]);
            let sel = select_all(&probe, Mode::Partial);
            let Some(q) = sel.get(d).and_then(|s| s.unanswered.first()).cloned() else { break };
            let a = ask_question(input, output, &q)?;
            profile.answers.insert(format!("{}.{}", d.as_str(), q.question), a);
        }
    }
    profile.dimensions = Some(relevant);
    Ok(profile)
}
