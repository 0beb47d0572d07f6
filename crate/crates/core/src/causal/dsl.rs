//! The `.cm` rule language.
//!
//! ```text
//! goal: light
//! intermediate: flame            # optional, comma separated
//! "burn fuel" AND wick CAUSES flame
//! flame CAUSES light
//! ```
//!
//! Keywords are case-insensitive. A label is either a bare word (no
//! whitespace, quotes, `#`, `,` or `:`) or a double-quoted string where `\"`
//! and `\\` escape. One rule per line.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use super::{CausalModel, CausalRule, RuleError};
use crate::label::Label;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("expected {expected}, found {found}")]
    Unexpected { expected: String, found: String },
    #[error("unterminated quoted label")]
    UnterminatedQuote,
    #[error("empty label")]
    EmptyLabel,
    #[error("goal declared more than once")]
    DuplicateGoal,
    #[error("rule has no antecedents before CAUSES")]
    EmptyRuleBody,
    #[error("effect `{0}` appears in its own antecedents")]
    SelfCause(Label),
    #[error("missing `goal:` declaration")]
    MissingGoal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Quoted(String),
    Colon,
    Comma,
}

impl Tok {
    fn keyword(&self, kw: &str) -> bool {
        matches!(self, Tok::Word(w) if w.eq_ignore_ascii_case(kw))
    }
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "`{w}`"),
            Tok::Quoted(q) => write!(f, "\"{q}\""),
            Tok::Colon => f.write_str("`:`"),
            Tok::Comma => f.write_str("`,`"),
        }
    }
}

struct Spanned {
    tok: Tok,
    column: usize,
}

fn is_bare(c: char) -> bool {
    !(c.is_whitespace() || matches!(c, '"' | '#' | ',' | ':'))
}

fn tokenize(line: &str, line_no: usize) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    let err = |column: usize, kind| ParseError {
        line: line_no,
        column,
        kind,
    };
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        match c {
            '#' => break,
            c if c.is_whitespace() => i += 1,
            ':' => {
                toks.push(Spanned { tok: Tok::Colon, column });
                i += 1;
            }
            ',' => {
                toks.push(Spanned { tok: Tok::Comma, column });
                i += 1;
            }
            '"' => {
                let mut text = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return Err(err(column, ParseErrorKind::UnterminatedQuote)),
                        Some('"') => {
                            i += 1;
                            break;
                        }
                        Some('\\') if matches!(chars.get(i + 1), Some('"' | '\\')) => {
                            text.push(chars[i + 1]);
                            i += 2;
                        }
                        Some(&ch) => {
                            text.push(ch);
                            i += 1;
                        }
                    }
                }
                toks.push(Spanned { tok: Tok::Quoted(text), column });
            }
            _ => {
                let start = i;
                while i < chars.len() && is_bare(chars[i]) {
                    i += 1;
                }
                toks.push(Spanned {
                    tok: Tok::Word(chars[start..i].iter().collect()),
                    column,
                });
            }
        }
    }
    Ok(toks)
}

struct LineParser<'a> {
    toks: &'a [Spanned],
    pos: usize,
    line: usize,
    end_column: usize,
}

impl LineParser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn column(&self) -> usize {
        self.toks
            .get(self.pos)
            .map_or(self.end_column, |s| s.column)
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: self.line,
            column: self.column(),
            kind,
        }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        let found = self
            .peek()
            .map_or_else(|| "end of line".to_string(), Tok::to_string);
        self.error(ParseErrorKind::Unexpected {
            expected: expected.to_string(),
            found,
        })
    }

    fn label(&mut self) -> Result<Label, ParseError> {
        let text = match self.peek() {
            Some(Tok::Quoted(q)) => q.clone(),
            Some(tok @ Tok::Word(w)) if !is_keyword(tok) => w.clone(),
            _ => return Err(self.unexpected("label")),
        };
        let label = Label::new(&text).map_err(|_| self.error(ParseErrorKind::EmptyLabel))?;
        self.pos += 1;
        Ok(label)
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.unexpected("end of line")),
        }
    }
}

fn is_keyword(tok: &Tok) -> bool {
    tok.keyword("and") || tok.keyword("causes")
}

/// Parses `.cm` source into a model. Structural checks that need the whole
/// model (cycles, cause-less intermediates) are left to validation.
pub fn parse_model(source: &str) -> Result<CausalModel, ParseError> {
    let mut goal: Option<Label> = None;
    let mut intermediates = BTreeSet::new();
    let mut rules = Vec::new();

    for (idx, raw) in source.lines().enumerate() {
        let line_no = idx + 1;
        let toks = tokenize(raw, line_no)?;
        if toks.is_empty() {
            continue;
        }
        let mut p = LineParser {
            toks: &toks,
            pos: 0,
            line: line_no,
            end_column: raw.chars().count() + 1,
        };

        let header = matches!(toks.get(1), Some(Spanned { tok: Tok::Colon, .. }));
        if header && toks[0].tok.keyword("goal") {
            if goal.is_some() {
                return Err(p.error(ParseErrorKind::DuplicateGoal));
            }
            p.pos = 2;
            goal = Some(p.label()?);
            p.finish()?;
            continue;
        }
        if header && toks[0].tok.keyword("intermediate") {
            p.pos = 2;
            intermediates.insert(p.label()?);
            while p.peek() == Some(&Tok::Comma) {
                p.pos += 1;
                intermediates.insert(p.label()?);
            }
            p.finish()?;
            continue;
        }

        if p.peek().is_some_and(|t| t.keyword("causes")) {
            return Err(p.error(ParseErrorKind::EmptyRuleBody));
        }
        let mut antecedents = vec![p.label()?];
        loop {
            match p.peek() {
                Some(t) if t.keyword("and") => {
                    p.pos += 1;
                    antecedents.push(p.label()?);
                }
                Some(t) if t.keyword("causes") => {
                    p.pos += 1;
                    break;
                }
                _ => return Err(p.unexpected("`AND` or `CAUSES`")),
            }
        }
        let effect_column = p.column();
        let effect = p.label()?;
        p.finish()?;
        let rule = CausalRule::new(antecedents, effect).map_err(|e| ParseError {
            line: line_no,
            column: effect_column,
            kind: match e {
                RuleError::EmptyAntecedents => ParseErrorKind::EmptyRuleBody,
                RuleError::SelfCause(l) => ParseErrorKind::SelfCause(l),
            },
        })?;
        rules.push(rule);
    }

    let goal = goal.ok_or(ParseError {
        line: 1,
        column: 1,
        kind: ParseErrorKind::MissingGoal,
    })?;
    Ok(CausalModel::new(goal, rules).with_intermediates(intermediates))
}

fn write_label(out: &mut String, label: &Label) {
    let text = label.as_str();
    let reserved = ["and", "causes", "goal", "intermediate"].contains(&text);
    if !reserved && text.chars().all(is_bare) {
        out.push_str(text);
        return;
    }
    out.push('"');
    for c in text.chars() {
        if matches!(c, '"' | '\\') {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
}

pub(super) fn serialize(model: &CausalModel) -> String {
    let mut out = String::from("goal: ");
    write_label(&mut out, model.goal());
    out.push('\n');
    if !model.declared_intermediates().is_empty() {
        out.push_str("intermediate: ");
        for (i, label) in model.declared_intermediates().iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            write_label(&mut out, label);
        }
        out.push('\n');
    }
    for rule in model.rules() {
        for (i, label) in rule.antecedents().iter().enumerate() {
            if i > 0 {
                out.push_str(" AND ");
            }
            write_label(&mut out, label);
        }
        out.push_str(" CAUSES ");
        write_label(&mut out, rule.effect());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causal::NodeKind;
    use proptest::prelude::*;

    fn l(s: &str) -> Label {
        Label::new(s).unwrap()
    }

    #[test]
    fn single_and_rule() {
        let m = parse_model(
            "goal: light\n\"provide electricity\" AND \"turn electricity into light\" CAUSES light",
        )
        .unwrap();
        assert_eq!(m.goal(), &l("light"));
        assert_eq!(m.rules().len(), 1);
        assert_eq!(
            m.function_labels(),
            [l("provide electricity"), l("turn electricity into light")]
                .into_iter()
                .collect()
        );
    }

    #[test]
    fn two_rule_chain_preserves_order() {
        let m = parse_model("goal: light\n\"burn fuel\" CAUSES flame\nflame CAUSES light\n").unwrap();
        assert_eq!(m.rules()[0].effect(), &l("flame"));
        assert_eq!(m.rules()[1].effect(), &l("light"));
        assert_eq!(m.nodes()[&l("flame")], NodeKind::Intermediate);
    }

    #[test]
    fn self_cause_is_rejected() {
        let err = parse_model("goal: a\n\"a\" CAUSES a").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::SelfCause(l("a")));
        assert_eq!((err.line, err.column), (2, 12));
    }

    #[test]
    fn duplicate_goal() {
        let err = parse_model("goal: a\ngoal: b\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::DuplicateGoal);
        assert_eq!(err.line, 2);
    }

    #[test]
    fn empty_rule_body() {
        let err = parse_model("goal: light\nCAUSES light\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::EmptyRuleBody);
        assert_eq!((err.line, err.column), (2, 1));
    }

    #[test]
    fn syntax_error_reports_position_and_expectation() {
        let err = parse_model("goal: light\nwax wick CAUSES light\n").unwrap_err();
        assert_eq!((err.line, err.column), (2, 5));
        assert_eq!(
            err.to_string(),
            "line 2, column 5: expected `AND` or `CAUSES`, found `wick`"
        );

        let err = parse_model("goal: light\nwax AND\n").unwrap_err();
        assert_eq!((err.line, err.column), (2, 8));
        assert!(err.to_string().contains("found end of line"));
    }

    #[test]
    fn missing_goal_and_unterminated_quote() {
        assert_eq!(
            parse_model("a CAUSES b").unwrap_err().kind,
            ParseErrorKind::MissingGoal
        );
        assert_eq!(
            parse_model("goal: \"light").unwrap_err().kind,
            ParseErrorKind::UnterminatedQuote
        );
        assert_eq!(
            parse_model("goal: \"  \"").unwrap_err().kind,
            ParseErrorKind::EmptyLabel
        );
    }

    #[test]
    fn keywords_and_comments() {
        let m = parse_model(
            "# lamp\nGOAL: Light  # trailing\nIntermediate: glow, \"hot wire\"\nA and \"Causes\" causes glow\nglow AND \"hot wire\" Causes LIGHT\nx CAUSES \"hot wire\"\n",
        )
        .unwrap();
        assert_eq!(m.goal(), &l("light"));
        assert!(m.rules()[0].antecedents().contains(&l("causes")));
        assert_eq!(m.declared_intermediates().len(), 2);
        assert!(m.validate().is_ok());
    }

    #[test]
    fn serializer_quotes_when_needed() {
        let m = parse_model("goal: light\n\"burn fuel\" AND \"and\" AND \"say \\\"hi\\\"\" CAUSES light\n")
            .unwrap();
        assert_eq!(
            m.to_source(),
            "goal: light\n\"and\" AND \"burn fuel\" AND \"say \\\"hi\\\"\" CAUSES light\n"
        );
    }

    fn label_strategy() -> impl Strategy<Value = Label> {
        prop_oneof![
            "[a-z]{1,6}",
            "[a-zA-Z \"#:,\\\\]{0,4}[a-z][a-z \"#\\\\]{0,4}",
            Just("and".to_string()),
            Just("goal".to_string()),
        ]
        .prop_filter_map("non-empty", |s| Label::new(&s).ok())
    }

    fn model_strategy() -> impl Strategy<Value = CausalModel> {
        let rule = (prop::collection::vec(label_strategy(), 1..4), label_strategy())
            .prop_filter_map("no self cause", |(ants, eff)| CausalRule::new(ants, eff).ok());
        (
            label_strategy(),
            prop::collection::btree_set(label_strategy(), 0..3),
            prop::collection::vec(rule, 0..6),
        )
            .prop_map(|(goal, inter, rules)| CausalModel::new(goal, rules).with_intermediates(inter))
    }

    proptest! {
        #[test]
        fn parse_inverts_serialize(model in model_strategy()) {
            let text = model.to_source();
            let reparsed = parse_model(&text).unwrap();
            prop_assert_eq!(&reparsed, &model);
            prop_assert_eq!(reparsed.to_source(), text);
        }
    }
}
