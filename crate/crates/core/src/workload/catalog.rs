use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use super::apps::{AppModel, AppParams, StageParams, ToolEdge, ToolParams};
use super::Catalog;
use crate::model::StageKind::{self, Llm, Regular};

fn st(name: &str, kind: StageKind, tasks: usize, base: f64, latent: f64, noise: f64, preds: &[usize]) -> StageParams {
    StageParams {
        name: name.to_string(),
        kind,
        tasks,
        base,
        latent,
        noise,
        task_jitter: if tasks > 1 { 0.1 } else { 0.0 },
        preds: preds.to_vec(),
        per_tool: 0.0,
    }
}

fn tool(name: &str, base: f64, select: f64) -> ToolParams {
    ToolParams { stage: st(name, Regular, 1, base, 0.0, 0.5, &[]), select }
}

fn edges(list: &[(usize, usize, f64)]) -> Vec<ToolEdge> {
    list.iter().map(|&(from, to, prob)| ToolEdge { from, to, prob }).collect()
}

/// Two applications per family. Durations are seconds at batch size 1.
pub fn default_catalog() -> Catalog {
    let seqsort = AppParams {
        name: "seqsort".into(),
        latent_sigma: 0.9,
        model: AppModel::Predefined {
            stages: vec![
                st("split", Llm, 1, 2.0, 1.0, 0.2, &[]),
                st("sort-a", Llm, 3, 6.0, 1.0, 0.25, &[0]),
                st("sort-b", Llm, 3, 6.0, 1.0, 0.25, &[0]),
                st("score-a", Regular, 3, 0.6, 0.3, 0.1, &[1]),
                st("score-b", Regular, 3, 0.6, 0.3, 0.1, &[2]),
                st("keep-a", Regular, 1, 0.3, 0.0, 0.1, &[3]),
                st("keep-b", Regular, 1, 0.3, 0.0, 0.1, &[4]),
                st("merge", Llm, 2, 5.0, 1.0, 0.25, &[5, 6]),
                st("score-merged", Regular, 2, 0.5, 0.3, 0.1, &[7]),
                st("finalize", Llm, 1, 4.0, 1.0, 0.25, &[8]),
            ],
        },
    };
    let docmerge = AppParams {
        name: "docmerge".into(),
        latent_sigma: 0.9,
        model: AppModel::Predefined {
            stages: vec![
                st("merge-candidates", Llm, 4, 5.0, 1.0, 0.2, &[]),
                st("score", Regular, 4, 0.8, 0.3, 0.1, &[0]),
                st("aggregate", Llm, 2, 6.0, 1.0, 0.25, &[1]),
                st("score-aggregate", Regular, 2, 0.8, 0.3, 0.1, &[2]),
                st("refine", Llm, 1, 5.0, 1.0, 0.25, &[3]),
                st("final-score", Regular, 1, 0.6, 0.0, 0.1, &[4]),
            ],
        },
    };
    let codegen = AppParams {
        name: "codegen".into(),
        latent_sigma: 0.9,
        model: AppModel::Chain {
            prefix: vec![st("write-tests", Llm, 1, 2.0, 1.0, 0.2, &[])],
            pattern: vec![
                st("generate", Llm, 1, 4.0, 1.0, 0.25, &[]),
                st("execute", Regular, 1, 0.6, 0.0, 0.3, &[]),
                st("reflect", Llm, 1, 2.5, 1.0, 0.25, &[]),
            ],
            max_iterations: 5,
            continue_prob: 0.45,
            complexity: 1.5,
        },
    };
    let websearch = AppParams {
        name: "websearch".into(),
        latent_sigma: 0.9,
        model: AppModel::Chain {
            prefix: vec![st("think", Llm, 1, 1.5, 1.0, 0.2, &[])],
            pattern: vec![st("search", Regular, 1, 1.2, 0.0, 0.4, &[]), st("observe", Llm, 1, 2.5, 1.0, 0.25, &[])],
            max_iterations: 5,
            continue_prob: 0.5,
            complexity: 1.5,
        },
    };
    let mut ta_planner = st("planner", Llm, 1, 2.5, 1.0, 0.2, &[]);
    ta_planner.per_tool = 0.15;
    let taskauto = AppParams {
        name: "taskauto".into(),
        latent_sigma: 0.4,
        model: AppModel::Planning {
            planner: ta_planner,
            tools: vec![
                tool("translate", 2.0, 0.5),
                tool("segment", 6.0, 0.4),
                tool("detect", 4.0, 0.4),
                tool("caption", 3.0, 0.4),
                tool("speak", 8.0, 0.3),
                tool("classify", 1.5, 0.3),
            ],
            edges: edges(&[(0, 1, 0.5), (0, 2, 0.5), (1, 3, 0.5), (2, 3, 0.4), (3, 4, 0.5), (2, 5, 0.4)]),
            suffix: vec![],
        },
    };
    let mut lc_planner = st("planner", Llm, 1, 2.0, 1.0, 0.2, &[]);
    lc_planner.per_tool = 0.1;
    let mut joiner = st("joiner", Llm, 1, 2.5, 1.0, 0.2, &[]);
    joiner.per_tool = 0.15;
    let llmcompiler = AppParams {
        name: "llmcompiler".into(),
        latent_sigma: 0.4,
        model: AppModel::Planning {
            planner: lc_planner,
            tools: vec![
                tool("search-1", 2.5, 0.4),
                tool("search-2", 2.5, 0.4),
                tool("lookup", 1.5, 0.3),
                tool("calculate", 0.8, 0.3),
                tool("search-3", 3.0, 0.25),
                tool("compare", 1.2, 0.3),
            ],
            edges: edges(&[(0, 3, 0.5), (1, 3, 0.5), (2, 5, 0.5), (3, 5, 0.5), (4, 5, 0.5)]),
            suffix: vec![joiner],
        },
    };
    Catalog { version: 1, apps: vec![seqsort, docmerge, codegen, websearch, taskauto, llmcompiler] }
}
