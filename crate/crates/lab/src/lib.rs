// SPDX-License-Identifier: Apache-2.0

//! Experiment runner for `permquery-core`: text formats, CSV/JSON rows and
//! the `permquery` command line.

pub mod cli;
pub mod formats;
pub mod runs;
