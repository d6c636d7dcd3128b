//! Bundled scenario fixtures.

use std::io;
use std::path::{Path, PathBuf};

/// A protocol file with the traces shipped alongside it.
#[derive(Debug, Clone, Copy)]
pub struct Scenario {
    pub name: &'static str,
    pub summary: &'static str,
    pub protocol: Fixture,
    pub traces: &'static [Fixture],
}

#[derive(Debug, Clone, Copy)]
pub struct Fixture {
    pub file: &'static str,
    pub text: &'static str,
}

macro_rules! fixture {
    ($file:literal) => {
        Fixture { file: $file, text: include_str!(concat!("../fixtures/", $file)) }
    };
}

pub const SCENARIOS: &[Scenario] = &[
    Scenario {
        name: "payment-base",
        summary: "payment by cash only, constraint paid before sent",
        protocol: fixture!("payment-base.proto"),
        traces: &[fixture!("payment-cash.trace"), fixture!("payment-early-send.trace")],
    },
    Scenario {
        name: "payment",
        summary: "payment by cash or card under the unchanged constraint",
        protocol: fixture!("payment.proto"),
        traces: &[
            fixture!("payment-cash.trace"),
            fixture!("payment-card.trace"),
            fixture!("payment-early-send.trace"),
            fixture!("payment-retired.trace"),
        ],
    },
    Scenario {
        name: "insurance-a",
        summary: "reimbursement owed for an approved procedure",
        protocol: fixture!("insurance-a.proto"),
        traces: &[
            fixture!("insurance-a-approved.trace"),
            fixture!("insurance-a-late-approval.trace"),
            fixture!("insurance-a-unpaid.trace"),
        ],
    },
    Scenario {
        name: "insurance-c",
        summary: "insurer pays an in-network surgeon after procedure and bill",
        protocol: fixture!("insurance-c.proto"),
        traces: &[
            fixture!("insurance-c-happy.trace"),
            fixture!("insurance-c-wrong-order.trace"),
            fixture!("insurance-c-unpaid.trace"),
            fixture!("insurance-c-network.trace"),
            fixture!("insurance-c-no-network.trace"),
        ],
    },
    Scenario {
        name: "train",
        summary: "punch the ticket before travelling",
        protocol: fixture!("train.proto"),
        traces: &[fixture!("train-punched.trace"), fixture!("train-unpunched.trace")],
    },
    Scenario {
        name: "contract-net",
        summary: "contract net with award and payment commitments",
        protocol: fixture!("contract-net.proto"),
        traces: &[
            fixture!("contract-net-award.trace"),
            fixture!("contract-net-reject.trace"),
            fixture!("contract-net-unsolicited.trace"),
        ],
    },
    Scenario {
        name: "mifid-stylized",
        summary: "stylized investment advice (not the directive's inventory)",
        protocol: fixture!("mifid-stylized.proto"),
        traces: &[
            fixture!("mifid-compliant.trace"),
            fixture!("mifid-unsuitable.trace"),
            fixture!("mifid-amended.trace"),
        ],
    },
];

pub fn find(name: &str) -> Option<&'static Scenario> {
    SCENARIOS.iter().find(|s| s.name == name)
}

/// Looks up a bundled trace by file name, e.g. `payment-cash.trace`.
pub fn trace(file: &str) -> Option<&'static str> {
    SCENARIOS.iter().flat_map(|s| s.traces).find(|t| t.file == file).map(|t| t.text)
}

impl Scenario {
    pub fn files(&self) -> impl Iterator<Item = &Fixture> {
        std::iter::once(&self.protocol).chain(self.traces)
    }

    /// Writes the protocol and traces into `dir`, returning the written paths.
    pub fn extract(&self, dir: &Path) -> io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        self.files()
            .map(|f| {
                let path = dir.join(f.file);
                std::fs::write(&path, f.text)?;
                Ok(path)
            })
            .collect()
    }
}
