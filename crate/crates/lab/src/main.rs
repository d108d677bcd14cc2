// SPDX-License-Identifier: Apache-2.0

fn main() {
    let (stdout, stderr) = (std::io::stdout(), std::io::stderr());
    let code = permquery::cli::run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock());
    std::process::exit(code);
}
