#!/usr/bin/env python3
"""Generate the synthetic 89-abstract chemistry corpus and the bilingual
token table used by the lexicon/noise mock backends.

The abstracts are template-generated placeholders with the shape of short
CNKI-style chemistry abstracts; they are not real publications. Output is
deterministic (no randomness), so re-running produces identical files.

    python3 tools/gen_synthetic_corpus.py
"""
import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent / "data"

SUBJECTS = [
    ("纳米材料", "nanomaterials"),
    ("催化剂", "catalysts"),
    ("高分子", "polymers"),
    ("电化学", "electrochemistry"),
    ("配位化合物", "coordination-compounds"),
    ("有机合成", "organic-synthesis"),
    ("分析化学", "analytical-chemistry"),
    ("绿色化学", "green-chemistry"),
    ("化学工程", "chemical-engineering"),
    ("计算化学", "computational-chemistry"),
]
METHODS = [
    ("密度泛函理论", "density-functional-theory"),
    ("分子动力学", "molecular-dynamics"),
    ("实验设计", "experimental-design"),
    ("光谱分析", "spectral-analysis"),
    ("机器学习", "machine-learning"),
    ("正交试验", "orthogonal-testing"),
    ("热重分析", "thermogravimetric-analysis"),
    ("电子显微镜", "electron-microscopy"),
    ("数值模拟", "numerical-simulation"),
]
PROPERTIES = [
    ("稳定性", "stability"),
    ("反应活性", "reactivity"),
    ("选择性", "selectivity"),
    ("溶解度", "solubility"),
    ("导电性", "conductivity"),
    ("吸附性能", "adsorption-performance"),
    ("热力学性质", "thermodynamic-properties"),
    ("反应速率", "reaction-rate"),
    ("结构特征", "structural-features"),
    ("表面性质", "surface-properties"),
    ("降解效率", "degradation-efficiency"),
]
FINDINGS = [
    ("显著提高", "significantly-improves"),
    ("明显降低", "clearly-reduces"),
    ("有效控制", "effectively-controls"),
    ("准确预测", "accurately-predicts"),
    ("系统优化", "systematically-optimizes"),
]
FIXED = [
    ("是", "is"),
    ("领域", "field"),
    ("的", "of"),
    ("重要", "important"),
    ("研究方向", "research-direction"),
    ("本文", "this-paper"),
    ("采用", "adopts"),
    ("方法", "method"),
    ("研究", "studies"),
    ("了", "done"),
    ("结果表明", "results-show"),
    ("该方法", "the-method"),
    ("能够", "can"),
    ("在", "in"),
    ("工业", "industrial"),
    ("应用", "application"),
    ("中", "within"),
    ("具有", "has"),
    ("较高", "high"),
    ("价值", "value"),
    ("，", ","),
    ("。", "."),
]


def main():
    rows = []
    for i in range(89):
        # Co-prime strides keep all 89 (subject, method, property) triples distinct.
        s = (i * 3) % len(SUBJECTS)
        m = (i * 5) % len(METHODS)
        p = (i * 7) % len(PROPERTIES)
        f = i % len(FINDINGS)
        subj, meth, prop, find = SUBJECTS[s][0], METHODS[m][0], PROPERTIES[p][0], FINDINGS[f][0]
        text = (
            f"{subj}是化学领域的重要研究方向。本文采用{meth}方法，研究了{subj}的{prop}，"
            f"结果表明该方法能够{find}{prop}，在工业应用中具有较高的价值。"
        )
        rows.append({
            "id": f"CHE-{i + 1:02d}",
            "domain": "chemistry",
            "title": f"{subj}的{prop}研究",
            "text": text,
            "variant": "simplified",
        })
    with open(ROOT / "corpus" / "che89_synthetic.jsonl", "w", encoding="utf-8", newline="\n") as out:
        for row in rows:
            out.write(json.dumps(row, ensure_ascii=False) + "\n")

    table = SUBJECTS + METHODS + PROPERTIES + FINDINGS + FIXED + [("化学", "chemistry")]
    with open(ROOT / "mock" / "bilingual.tsv", "w", encoding="utf-8", newline="\n") as out:
        out.write("# zh<TAB>en, one entry per line; both columns must be unique\n")
        for zh, en in table:
            out.write(f"{zh}\t{en}\n")


if __name__ == "__main__":
    main()
