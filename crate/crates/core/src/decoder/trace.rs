// Copyright contributors to the qmaxwell project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

use std::io::{self, Write};

use serde::Serialize;

/// One step of a decoding run, as emitted by `--trace`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    /// A dangling check fixed its last erased variable.
    Peel { check: usize, var: usize },
    /// An erased variable became a fresh pivot.
    Guess { var: usize, pivot: usize },
    /// A restrictive check eliminated a pivot; `var` is the variable that
    /// introduced it.
    Demote { check: usize, pivot: usize, var: usize },
    /// A fully erased generator had `var` gauge-fixed to zero.
    Prune { generator: usize, var: usize },
}

/// Writes events as JSON lines.
pub fn write_jsonl<W: Write>(mut out: W, events: &[TraceEvent]) -> io::Result<()> {
    for e in events {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
