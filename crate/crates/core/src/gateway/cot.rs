//! Evidence-grounded reasoning step: the model explains in one paragraph how
//! the retrieved documents support its answer, then states the answer on a
//! final `ANSWER:` line.

use super::{truncate_to_budget, Gateway, GatewayError};

const EVIDENCE_SNIPPET_TOKENS: usize = 300;
const COT_OUTPUT_TOKENS: usize = 1024;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CotAnswer {
    pub answer: String,
    pub rationale_paragraph: String,
}

/// Ask for an explained answer over nonempty evidence.
pub fn cot_reason(
    gateway: &Gateway,
    question: &str,
    evidence: &[String],
) -> Result<CotAnswer, GatewayError> {
    assert!(!evidence.is_empty(), "evidence must be nonempty");

    let mut prompt = String::new();
    prompt.push_str("## Task: evidence-grounded answer\n\n");
    prompt.push_str(question);
    prompt.push_str("\n\nEvidence:\n");
    for (i, block) in evidence.iter().enumerate() {
        let snippet = truncate_to_budget(block, EVIDENCE_SNIPPET_TOKENS, gateway.tokenizer())?;
        prompt.push_str(&format!("[{}] {}\n", i + 1, snippet));
    }
    prompt.push_str(
        "\nWrite one paragraph explaining how the evidence supports your answer, \
         then end with a final line of the form \"ANSWER: <answer>\".\n",
    );

    let response = gateway.complete(&prompt, COT_OUTPUT_TOKENS)?.text;
    parse_cot(&response)
}

fn parse_cot(response: &str) -> Result<CotAnswer, GatewayError> {
    let marker = response
        .lines()
        .rev()
        .find(|l| l.trim_start().starts_with("ANSWER:"))
        .ok_or_else(|| GatewayError::Parse("missing ANSWER line".into()))?;
    let answer = marker.trim_start().trim_start_matches("ANSWER:").trim().to_string();
    let rationale = response[..response.rfind(marker).expect("marker came from response")]
        .trim()
        .to_string();
    if rationale.is_empty() {
        return Err(GatewayError::Parse("empty rationale paragraph".into()));
    }
    Ok(CotAnswer {
        answer,
        rationale_paragraph: rationale,
    })
}
