mod support;

use std::path::Path;
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use audit_core::agents::{
    dual_agent_verify, extract_json_fence, llm_extract, oracle_extract, AgentConfig, ChatMessage, ExtractionRecord,
    Extractor, LlmAgent, OracleAgent, ReplayTransport, ScriptedTransport, VerificationStatus,
};
use audit_core::corpus::{load_labels, load_manifest, load_text, read_json, CorpusLayout};
use audit_core::cost::{price_usage, PricingTable, TokenUsage};
use audit_core::datagen::llm::{llm_generate_bank_info, llm_generate_loan_info, UserInformation};
use audit_core::datagen::{check_consistency, generate_corpus, name_pool_capacity, GenParams, GenerationHistory};
use audit_core::domain::{BankStatement, DocKind, FieldName, Money};
use audit_core::evaluate::{aggregate, evaluate_record, llm_evaluate, round_half_up_2, truth_json, AccuracyTable, KindAccuracy, ScoredDocument};
use audit_core::prompts;

use support::{audit, snapshot, write_fixture, MockServer};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run_all_oracle(dir: &Path, pairs: &str) -> Result<String, String> {
    let (code, out, err) = audit(&["--corpus-dir", dir.to_str().unwrap(), "run-all", "--pairs", pairs, "--seed", "7", "--agent", "oracle"]);
    ensure(code == 0, || format!("run-all exited {code}: {err}"))?;
    Ok(out)
}

fn oracle_round_trip() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let started = Instant::now();
    run_all_oracle(dir.path(), "49")?;
    let elapsed = started.elapsed();
    let layout = CorpusLayout::new(dir.path());
    let table: AccuracyTable = read_json(&layout.report("accuracy", "json")).map_err(|e| e.to_string())?;
    let oracle = table.models.iter().find(|m| m.model == "oracle").ok_or("no oracle column")?;
    for kind in [DocKind::Bank, DocKind::Loan] {
        let acc = oracle.kind(kind).ok_or_else(|| format!("no {kind} accuracy"))?;
        ensure(acc.overall == 1.0, || format!("{kind} overall {}", acc.overall))?;
        for f in &acc.fields {
            ensure(f.accuracy == 1.0, || format!("{kind} {} accuracy {}", f.field, f.accuracy))?;
        }
    }
    let summary: serde_json::Value =
        read_json(&layout.report("verification.oracle__oracle", "json")).map_err(|e| e.to_string())?;
    let verified = summary["verified"].as_u64().unwrap_or(0);
    ensure(verified == 98, || format!("{verified} of 98 documents verified: {summary}"))?;
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("49 pairs, every field and overall 1.00 for both kinds, oracle vs oracle verified 98/98, {elapsed:.2?}"))
}

fn mutations(s: &BankStatement) -> Vec<(String, BankStatement)> {
    let cent = Money::from_cents(1);
    let mut out = Vec::new();
    let mut push = |label: String, f: &dyn Fn(&mut BankStatement)| {
        let mut m = s.clone();
        f(&mut m);
        out.push((label, m));
    };
    push("opening".into(), &|m| m.opening_balance = m.opening_balance + cent);
    push("total_credit".into(), &|m| m.total_credit = m.total_credit + cent);
    push("total_debit".into(), &|m| m.total_debit = m.total_debit + cent);
    push("closing".into(), &|m| m.closing_balance = m.closing_balance + cent);
    for (i, t) in s.transactions.iter().enumerate() {
        if t.credit.is_some() {
            push(format!("tx{i}.credit"), &|m| m.transactions[i].credit = m.transactions[i].credit.map(|c| c + cent));
        }
        if t.debit.is_some() {
            push(format!("tx{i}.debit"), &|m| m.transactions[i].debit = m.transactions[i].debit.map(|d| d + cent));
        }
        push(format!("tx{i}.balance"), &|m| m.transactions[i].balance = m.transactions[i].balance + cent);
    }
    out
}

fn ledger_invariants() -> Outcome {
    let per_seed = (name_pool_capacity() / 2).min(500);
    let mut statements = Vec::new();
    let mut seed = 1;
    while statements.len() < 1000 {
        let pairs = generate_corpus(&GenParams::with_pairs(seed, per_seed)).map_err(|e| e.to_string())?;
        statements.extend(pairs.into_iter().map(|p| p.bank));
        seed += 1;
    }
    let mut checked = 0;
    for s in &statements {
        let v = check_consistency(s);
        ensure(v.is_empty(), || format!("{} has violations: {v:?}", s.account_number))?;
        for (label, m) in mutations(s) {
            ensure(!check_consistency(&m).is_empty(), || format!("{}: +1 cent on {label} undetected", s.account_number))?;
            checked += 1;
        }
    }

    let sample: BankStatement = serde_json::from_value(
        audit_core::agents::parse_json_lenient(include_str!("../../core/tests/fixtures/sample_bank.json")).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let identity = sample.opening_balance + sample.total_credit - sample.total_debit;
    ensure(identity == sample.closing_balance && identity == Money::from_dollars(591_800), || {
        format!("sample identity gives {identity:?}")
    })?;
    Ok(format!(
        "{} statements consistent; {checked} single-cent mutations of opening, totals, closing and every transaction amount \
         each raise a violation; the sample satisfies 175,800.00 + 510,000.00 - 94,000.00 = 591,800.00 (its transaction \
         rows are not checked, as they do not sum to its printed totals)",
        statements.len()
    ))
}

fn published_aggregation() -> Outcome {
    let bank = [
        ("gpt4", [0.98, 0.98, 1.00, 1.00, 0.97], 0.99),
        ("dbrx", [0.94, 0.96, 1.00, 1.00, 0.67], 0.91),
        ("llama3_70b", [1.00, 1.00, 1.00, 1.00, 0.67], 0.93),
        ("llama2_70b", [1.00, 0.94, 1.00, 1.00, 0.67], 0.92),
    ];
    let loan = [
        ("gpt4", [1.00, 0.98, 1.00], 0.99),
        ("dbrx", [1.00, 0.98, 1.00], 0.99),
        ("llama3_70b", [1.00, 0.98, 1.00], 0.99),
        ("llama2_70b", [1.00, 1.00, 0.98], 0.99),
    ];
    let mut cells = Vec::new();
    for (model, fields, want) in bank {
        let got = KindAccuracy::from_cells(DocKind::Bank, &fields).map_err(|e| e.to_string())?.overall;
        ensure((got - want).abs() <= 0.005, || format!("{model} bank {got} vs {want}"))?;
        cells.push(format!("{got:.2}"));
    }
    for (model, fields, want) in loan {
        let got = KindAccuracy::from_cells(DocKind::Loan, &fields).map_err(|e| e.to_string())?.overall;
        ensure((got - want).abs() <= 0.005, || format!("{model} loan {got} vs {want}"))?;
        cells.push(format!("{got:.2}"));
    }
    Ok(format!("mean of per-field accuracies reproduces all 8 overall cells: {}", cells.join(" ")))
}

fn cost_arithmetic() -> Outcome {
    let table = PricingTable::default();
    let gpt4 = price_usage(&TokenUsage::reported(5_000, 100), "gpt4", &table).map_err(|e| e.to_string())?;
    ensure(gpt4.input_cost.micros() == 50_000, || format!("gpt4 input {:?}", gpt4.input_cost))?;
    ensure(gpt4.total_cost.micros() == 53_000, || format!("gpt4 total {:?}", gpt4.total_cost))?;
    let llama = price_usage(&TokenUsage::reported(5_000, 0), "llama3_70b", &table).map_err(|e| e.to_string())?;
    ensure(llama.input_cost.micros() == 3_250, || format!("llama3_70b {:?}", llama.input_cost))?;
    let dbrx = price_usage(&TokenUsage::reported(5_000, 0), "dbrx", &table).map_err(|e| e.to_string())?;
    ensure(dbrx.input_cost.micros() == 6_000, || format!("dbrx {:?}", dbrx.input_cost))?;
    Ok("gpt4 5000/100 tokens: input 50000 and total 53000 micro-dollars; llama3_70b 5000: 3250; dbrx 5000: 6000".into())
}

fn multi_line_address_fixture() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = dir.path().join("c");
    let fixtures = dir.path().join("fixtures");
    let (code, _, err) = audit(&["--corpus-dir", corpus.to_str().unwrap(), "generate", "--pairs", "3"]);
    ensure(code == 0, || err)?;
    let layout = CorpusLayout::new(&corpus);
    let manifest = load_manifest(&layout).map_err(|e| e.to_string())?;
    let config = AgentConfig::for_model("gpt4");
    let truncated = &manifest.pairs[1].id;
    let mut texts = Vec::new();
    for entry in &manifest.pairs {
        let text = load_text(&layout, &entry.id, DocKind::Bank).map_err(|e| e.to_string())?;
        let mut record = oracle_extract(&text, DocKind::Bank).map_err(|e| e.to_string())?;
        if &entry.id == truncated {
            let first = record.get(FieldName::Address).and_then(|a| a.split(", ").next()).ok_or("no address")?.to_string();
            record.set(FieldName::Address, Some(first));
        }
        write_fixture(&fixtures, &config, &text, &record);
        texts.push((entry.id.clone(), text));
    }

    let replay = ReplayTransport::from_dir(&fixtures).map_err(|e| e.to_string())?;
    ensure(replay.len() == 3, || format!("{} fixtures", replay.len()))?;
    let llm = LlmAgent::new(config, Arc::new(replay));
    let mut scored = Vec::new();
    let mut flagged = Vec::new();
    for (id, text) in &texts {
        let record = llm.extract(text, DocKind::Bank).map_err(|e| e.to_string())?.record;
        let truth = &load_labels(&layout, id).map_err(|e| e.to_string())?;
        scored.push(ScoredDocument {
            model: llm.name(),
            doc_id: id.clone(),
            kind: DocKind::Bank,
            report: evaluate_record(&record, truth, DocKind::Bank),
        });
        let outcome = dual_agent_verify(text, DocKind::Bank, &OracleAgent, &llm).map_err(|e| e.to_string())?;
        let conflicts = outcome.conflicts();
        if outcome.status == VerificationStatus::Conflicted {
            flagged.push((id.clone(), conflicts));
        } else {
            ensure(conflicts.is_empty(), || format!("{id} verified with conflicts"))?;
        }
    }
    let table = aggregate(&scored).map_err(|e| e.to_string())?;
    let bank = table.models[0].bank.as_ref().ok_or("no bank accuracy")?;
    let address = bank.get(FieldName::Address).ok_or("no address cell")?;
    let address = round_half_up_2(address);
    ensure(address == 0.67, || format!("address accuracy {address}"))?;
    ensure(flagged == vec![(truncated.clone(), vec![FieldName::Address])], || format!("conflicts {flagged:?}"))?;
    Ok(format!("address accuracy {address:.2}; dual oracle vs llm:gpt4 conflicted only on {truncated} Address"))
}

fn golden(name: &str) -> Result<(String, String), String> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/golden");
    let read = |part: &str| {
        std::fs::read_to_string(format!("{dir}/{name}.{part}.golden.txt")).map_err(|e| format!("{name}.{part}: {e}"))
    };
    Ok((read("system")?, read("user")?))
}

fn matches_golden(messages: &[ChatMessage], name: &str) -> Result<(), String> {
    let (system, user) = golden(name)?;
    ensure(messages.len() == 2, || format!("{name}: {} messages", messages.len()))?;
    ensure(messages[0].content == system, || format!("{name} system message differs"))?;
    ensure(messages[1].content == user, || format!("{name} user message differs"))
}

fn prompt_fidelity() -> Outcome {
    let config = AgentConfig { backoff_base_ms: 0, max_retries: 0, ..AgentConfig::for_model("gpt4") };
    let loan_json = include_str!("../../core/tests/fixtures/sample_loan.json");
    let bank_json = include_str!("../../core/tests/fixtures/sample_bank.json");

    let mut history = GenerationHistory::default();
    history.record("John Doe", "123-456-789");
    let t = ScriptedTransport::from_texts(["no"; 4]);
    let _ = llm_generate_bank_info(&history, &config, &t);
    matches_golden(&t.requests()[0].messages, "bank_info")?;

    let info = UserInformation { first_name: "Jane".into(), last_name: "Doe".into(), address: "123 Elm Street, Yourtown, YS".into() };
    let t = ScriptedTransport::from_texts([loan_json]);
    llm_generate_loan_info(&info, &config, &t).map_err(|e| e.to_string())?;
    matches_golden(&t.requests()[0].messages, "loan_info")?;

    let text = "John Doe\n2450 Courage St, STE 108\nBrownsville, TX 78521\nOpening Balance | 175,800.00";
    let t = ScriptedTransport::from_texts(["```json\n{\"name\": \"John Doe\"}\n```"]);
    llm_extract(text, &config, &t).map_err(|e| e.to_string())?;
    matches_golden(&t.requests()[0].messages, "audit")?;

    let rendered = prompts::EVALUATION
        .render(&[("prediction", r#"{"name":"John Doe"}"#), ("true", r#"{"name":"John Doe"}"#)])
        .map_err(|e| e.to_string())?;
    matches_golden(&rendered, "evaluation")?;
    let pair = generate_corpus(&GenParams::with_pairs(7, 1)).map_err(|e| e.to_string())?.remove(0);
    let prediction = ExtractionRecord::default().with(FieldName::Name, "Jane Doe");
    let report = evaluate_record(&prediction, &pair.labels, DocKind::Loan);
    let t = ScriptedTransport::from_texts([serde_json::to_string(&report).map_err(|e| e.to_string())?]);
    llm_evaluate(&prediction, &pair.labels, DocKind::Loan, &config, &t).map_err(|e| e.to_string())?;
    let expected = prompts::EVALUATION
        .render(&[
            ("prediction", &serde_json::to_string(&prediction).unwrap()),
            ("true", &truth_json(&pair.labels, DocKind::Loan)),
        ])
        .map_err(|e| e.to_string())?;
    ensure(t.requests()[0].messages == expected, || "evaluation prompt differs from template substitution".into())?;

    for (label, sample) in [
        ("fenced", format!("Here it is:\n```json\n{bank_json}\n```\nDone.")),
        ("bare", bank_json.to_string()),
        ("bare loan", loan_json.to_string()),
        ("fenced trailing comma", "```json\n{\"name\": \"John Doe\", \"address\": \"2450 Courage St\",}\n```".to_string()),
    ] {
        extract_json_fence(&sample).map_err(|e| format!("{label}: {e}"))?;
    }
    Ok("bank info, loan info, audit and evaluation prompts byte-match the golden files; fenced, bare and trailing-comma samples parse".into())
}

fn live_endpoint() -> Outcome {
    let server = MockServer::start();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config_path = dir.path().join("run.json");
    let config = serde_json::json!({
        "corpus_dir": dir.path().join("c"),
        "n_pairs": 3,
        "extractors": ["llm:gpt4"],
        "second_agent": "oracle",
        "agents": [{"model_id": "gpt4", "provider_endpoint": server.url, "credential_ref": "ACCEPTANCE_API_KEY", "backoff_base_ms": 0}],
    });
    std::fs::write(&config_path, config.to_string()).map_err(|e| e.to_string())?;
    let output = Command::new(env!("CARGO_BIN_EXE_audit"))
        .args(["--config", config_path.to_str().unwrap(), "run-all"])
        .env("ACCEPTANCE_API_KEY", "sk-acceptance")
        .output()
        .map_err(|e| e.to_string())?;
    let stdout = String::from_utf8_lossy(&output.stdout);
    ensure(output.status.success(), || format!("exit {:?}: {}", output.status.code(), String::from_utf8_lossy(&output.stderr)))?;
    ensure(stdout.contains("| Bank Statement Overall Accuracy | 1.00 |"), || stdout.to_string())?;
    let requests = server.requests.load(std::sync::atomic::Ordering::SeqCst);
    ensure(requests == 6, || format!("{requests} requests"))?;
    Ok(format!(
        "run-all --agent llm:gpt4 completed against a local OpenAI-compatible server ({requests} chat completions); \
         live paid-API accuracies of the evaluated hosted models are out of scope and are covered by criteria 1, 3 and 5"
    ))
}

fn determinism() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    run_all_oracle(a.path(), "49")?;
    let first = snapshot(a.path());
    run_all_oracle(a.path(), "49")?;
    let again = snapshot(a.path());
    run_all_oracle(b.path(), "49")?;
    let other = snapshot(b.path());
    for (label, s) in [("same directory", &again), ("second directory", &other)] {
        let differing: Vec<_> = first.keys().chain(s.keys()).filter(|k| first.get(*k) != s.get(*k)).collect();
        ensure(differing.is_empty(), || format!("{label}: {differing:?} differ"))?;
    }
    let kinds = ["labels", "extractions", "eval", "reports"];
    for k in kinds {
        ensure(first.keys().any(|p| p.starts_with(k)), || format!("no {k} files written"))?;
    }
    Ok(format!("{} files byte-identical across reruns in the same and a second directory", first.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("oracle round-trip", oracle_round_trip),
        ("ledger invariants", ledger_invariants),
        ("published accuracy aggregation", published_aggregation),
        ("cost arithmetic", cost_arithmetic),
        ("multi-line address fixture", multi_line_address_fixture),
        ("prompt fidelity and fence parsing", prompt_fidelity),
        ("llm agent against an OpenAI-compatible endpoint", live_endpoint),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail}", n + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {why}", n + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
