mod common;

use audit_core::datagen::{generate_corpus, GenParams};
use audit_core::documents::{read_document, render, render_bank, Document, TemplateId};
use audit_core::domain::{DocKind, FieldName};

use common::{fold, sample_bank, sample_loan, sample_pair};

#[test]
fn published_sample_through_bank_1() {
    let doc = render_bank("sample", &sample_bank(), TemplateId::Bank1.template()).unwrap();
    assert!(doc.content.contains("175,800.00"));
    assert!(doc.content.contains("2024-02-01 to 2024-02-29"));
    let again = render_bank("sample", &sample_bank(), TemplateId::Bank1.template()).unwrap();
    assert_eq!(doc.content.as_bytes(), again.content.as_bytes());
}

#[test]
fn sample_loan_through_loan_1() {
    let doc = render(&sample_pair(), DocKind::Loan, TemplateId::Loan1.template()).unwrap();
    assert!(doc.content.contains("25,000"));
    assert!(doc.content.contains("Jane"));
    assert_eq!(sample_loan().amount.cents(), 2_500_000);
}

#[test]
fn wrong_kind_is_rejected() {
    assert!(render(&sample_pair(), DocKind::Loan, TemplateId::Bank2.template()).is_err());
    assert!(render(&sample_pair(), DocKind::Bank, TemplateId::Loan1.template()).is_err());
}

#[test]
fn multi_line_address_reads_as_two_lines() {
    let doc = render_bank("sample", &sample_bank(), TemplateId::Bank1.template()).unwrap();
    let text = read_document(&doc);
    let lines: Vec<&str> = text.lines().collect();
    let i = lines.iter().position(|l| *l == "2450 Courage St, STE 108").unwrap();
    assert_eq!(lines[i + 1], "Brownsville, TX 78521");
}

#[test]
fn plain_text_is_unchanged() {
    let doc = Document {
        pair_id: "x".into(),
        kind: DocKind::Bank,
        template_id: TemplateId::Bank1,
        content: "Opening Balance: 1.00\nClosing Balance: 2.00".into(),
    };
    assert_eq!(read_document(&doc), doc.content);
}

#[test]
fn every_label_survives_every_template() {
    let pairs = generate_corpus(&GenParams::with_pairs(11, 20)).unwrap();
    for pair in &pairs {
        for &t in TemplateId::ALL {
            let kind = t.kind();
            let text = read_document(&render(pair, kind, t.template()).unwrap());
            let flat = fold(&text);
            let joined = fold(&text.replace('\n', ", "));
            for &f in FieldName::applicable(kind) {
                let want = pair.labels.value(f, kind).unwrap();
                let found = if f == FieldName::Address { joined.contains(&want) } else { flat.contains(&want) };
                assert!(found, "{} {t}: {f} {want:?} missing from\n{text}", pair.id);
            }
        }
    }
}

#[test]
fn bank_templates_have_distinct_layouts() {
    let pair = sample_pair();
    let texts: Vec<String> =
        TemplateId::BANK.iter().map(|t| read_document(&render(&pair, DocKind::Bank, t.template()).unwrap())).collect();
    for i in 0..texts.len() {
        for j in i + 1..texts.len() {
            let a: Vec<&str> = texts[i].lines().collect();
            let b: Vec<&str> = texts[j].lines().collect();
            assert_ne!(a, b);
        }
    }
}

#[test]
fn reading_is_idempotent() {
    let pairs = generate_corpus(&GenParams::with_pairs(5, 6)).unwrap();
    for (i, pair) in pairs.iter().enumerate() {
        for doc in [
            render(pair, DocKind::Bank, TemplateId::for_pair(i).template()).unwrap(),
            render(pair, DocKind::Loan, TemplateId::Loan1.template()).unwrap(),
        ] {
            let once = read_document(&doc);
            let twice = read_document(&Document { content: once.clone(), ..doc.clone() });
            assert_eq!(once, twice);
        }
    }
}

#[test]
fn placeholders_are_sample_fields() {
    let bank: Vec<&str> = vec![
        "Account_Number", "Statement_Date", "Period_Covered", "name", "address_line1", "address_line2",
        "Opening_Balance", "Total_Credit_Amount", "Total_Debit_Amount", "Closing_Balance", "Account_Type",
        "Number_Transactions", "#transactions", "Date", "Description", "Credit", "Debit", "Balance",
    ];
    let bank_json: serde_json::Value = serde_json::to_value(sample_bank()).unwrap();
    let loan_json: serde_json::Value = serde_json::to_value(sample_loan()).unwrap();
    for &t in TemplateId::ALL {
        for p in t.template().placeholders() {
            match t.kind() {
                DocKind::Bank => assert!(bank.contains(&p.as_str()), "{t}: {p}"),
                DocKind::Loan => {
                    let known = loan_json.get(&p).is_some()
                        || loan_json["applicant"].get(&p).is_some()
                        || loan_json["loan_details"].get(&p).is_some();
                    assert!(known, "{t}: {p}");
                }
            }
        }
    }
    assert!(bank_json.get("transactions").is_some());
}
