use std::io::{BufRead, Write};

use cyrus_client::Client;

use crate::{output, Failure, Format};

const HELP: &str =
    "Type a question in English, or ':' followed by SQL. :history lists past turns, :quit leaves.";

/// One turn per line until `:quit` or end of input. Errors are printed and
/// the loop goes on.
pub async fn run(
    client: &Client,
    session: &str,
    format: Format,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    writeln!(out, "{HELP}")?;
    let mut history: Vec<String> = Vec::new();
    let mut line = String::new();
    loop {
        write!(out, "cyrus> ")?;
        out.flush()?;
        line.clear();
        if input.read_line(&mut line)? == 0 {
            writeln!(out)?;
            return Ok(());
        }
        let entry = line.trim();
        match entry {
            "" => continue,
            ":quit" | ":q" | ":exit" => return Ok(()),
            ":help" => {
                writeln!(out, "{HELP}")?;
                continue;
            }
            ":history" => {
                for (i, h) in history.iter().enumerate() {
                    writeln!(out, "{:>3}  {h}", i + 1)?;
                }
                continue;
            }
            _ => {}
        }
        history.push(entry.to_string());
        if let Some(sql) = entry.strip_prefix(':') {
            match client.run_sql(session, sql.trim()).await {
                Ok(t) => write!(out, "{}", output::table(&t, format))?,
                Err(e) => writeln!(out, "error: {e}")?,
            }
        } else {
            match client.translate(session, entry).await {
                Ok(r) => {
                    writeln!(out, "{}", r.sql)?;
                    write!(out, "{}", output::table(&r.result, format))?;
                }
                Err(e) => writeln!(out, "error: {e}")?,
            }
        }
    }
}
