//! Reference external policy: replies NOOP to every observation.
//!
//! Speaks over stdin/stdout by default, or connects to `--connect ADDR`.
//! `--malformed` replies with an invalid action kind instead.

use std::io::{BufReader, Write};
use std::net::TcpStream;
use std::process::ExitCode;

use visfore::policy::bridge::echo_policy_loop;

fn main() -> ExitCode {
    let mut malformed = false;
    let mut connect = None;
    let mut args = std::env::args().skip(1);
    while let Some(a) = args.next() {
        match a.as_str() {
            "--malformed" => malformed = true,
            "--connect" => connect = args.next(),
            other => {
                eprintln!("vf-echo-policy: unknown argument `{other}`");
                return ExitCode::from(2);
            }
        }
    }
    let res = match connect {
        Some(addr) => TcpStream::connect(&addr)
            .and_then(|s| Ok((s.try_clone()?, s)))
            .map_err(visfore::Error::from)
            .and_then(|(r, w)| echo_policy_loop(BufReader::new(r), w, malformed)),
        None => {
            let stdin = std::io::stdin();
            let stdout = std::io::stdout();
            let res = echo_policy_loop(stdin.lock(), stdout.lock(), malformed);
            let _ = std::io::stdout().flush();
            res
        }
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("vf-echo-policy: {e}");
            ExitCode::FAILURE
        }
    }
}
