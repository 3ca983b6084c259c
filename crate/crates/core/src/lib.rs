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

//! Erasure decoding for CSS quantum LDPC codes: peeling, the symbolic
//! quantum Maxwell decoder with a bounded guess budget, an ML reference,
//! exhaustive structural oracles and a Monte Carlo harness.

pub mod affine;
pub mod cli;
pub mod codes;
pub mod decoder;
pub mod gf2;
pub mod mlref;
pub mod oracle;
pub mod sim;
