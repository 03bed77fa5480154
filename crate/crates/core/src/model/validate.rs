use petgraph::unionfind::UnionFind;

use super::{ActionKind, StaticModel};
use crate::report::{Code, Diagnostic, ValidationReport};

/// Stage-legality table for flows.
///
/// Inside one thimac a thing enters through transfer/receive, is created or
/// processed in the interior, and leaves through release/transfer. Between
/// thimacs only transfer-to-transfer movement is allowed.
pub fn is_legal_flow(from: ActionKind, to: ActionKind, same_thimac: bool) -> bool {
    use ActionKind::*;
    if same_thimac {
        matches!(
            (from, to),
            (Transfer, Receive)
                | (Receive, Process)
                | (Receive, Release)
                | (Process, Release)
                | (Process, Create)
                | (Create, Release)
                | (Create, Process)
                | (Release, Transfer)
        )
    } else {
        (from, to) == (Transfer, Transfer)
    }
}

/// Checks every flow against the legality table. Triggers are unrestricted.
/// A graph split into several components only yields a warning.
pub fn validate_static(model: &StaticModel) -> ValidationReport {
    let mut report = ValidationReport::default();

    for root in model.roots() {
        if root.specializes {
            report.push(Diagnostic::warning(
                Code::RootSpecializes,
                root.path.to_string(),
                "specializes has no effect on a top-level thimac",
            ));
        }
    }

    for edge in model.flows() {
        let (Some(from), Some(to)) = (model.action(&edge.from), model.action(&edge.to)) else {
            unreachable!("edge endpoints are resolved at build time");
        };
        let same = from.owner == to.owner;
        if !is_legal_flow(from.kind, to.kind, same) {
            let scope = if same {
                format!("within thimac {}", from.owner)
            } else {
                format!("from thimac {} to thimac {}", from.owner, to.owner)
            };
            report.push(Diagnostic::error(
                Code::IllegalStagePair,
                format!("{} -> {}", edge.from, edge.to),
                format!("illegal stage pair {}→{} {scope}", from.kind, to.kind),
            ));
        }
    }

    let n = model.actions().len();
    if n > 1 {
        let mut components = UnionFind::<usize>::new(n);
        for edge in model.flows().iter().chain(model.triggers()) {
            let a = model.action_position(&edge.from).expect("resolved");
            let b = model.action_position(&edge.to).expect("resolved");
            components.union(a, b);
        }
        let mut labels = components.into_labeling();
        labels.sort_unstable();
        labels.dedup();
        if labels.len() > 1 {
            report.push(Diagnostic::warning(
                Code::Disconnected,
                "<model>",
                format!("actions form {} disconnected components", labels.len()),
            ));
        }
    }
    report
}
