// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "mmrl/common/errors.hpp"
#include "mmrl/common/io.hpp"
#include "mmrl/dataset/caption_corpus.hpp"
#include "mmrl/textmetrics/report.hpp"
#include "support/metric_oracle.hpp"
#include "support/temp_dir.hpp"

using namespace mmrl;
using namespace mmrl::textmetrics;
using Seq = TokenSequence;
using Refs = std::vector<Seq>;

TEST_CASE("tokenizer rules") {
  CHECK(tokenize_for_metrics("The robot picks up the red block.") ==
        Seq{"the", "robot", "picks", "up", "the", "red", "block"});
  CHECK(tokenize_for_metrics("").empty());
  CHECK(tokenize_for_metrics("Step 19: robot's arm") == Seq{"step", "19", "robot's", "arm"});
  CHECK(tokenize_for_metrics("  --  ").empty());
}

TEST_CASE("BLEU hand examples") {
  const std::vector<CaptionPair> same = {{{"a", "b", "c"}, {{"a", "b", "c"}}}, {{"x", "y"}, {{"x", "y"}}}};
  CHECK(bleu_corpus(same, {2, false}) == 1.0);

  const std::vector<CaptionPair> short_cand = {{{"the", "robot"}, {{"the", "robot", "moves"}}}};
  CHECK(bleu_corpus(short_cand, {2, false}) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  CHECK(std::abs(bleu_corpus(short_cand, {2, false}) - 0.60653) < 5e-6);

  const std::vector<CaptionPair> disjoint = {{{"a", "b"}, {{"c", "d"}}}};
  CHECK(bleu_corpus(disjoint, {1, false}) == 0.0);
  CHECK(bleu_corpus(disjoint, {1, true}) > 0.0);
}

TEST_CASE("BLEU precondition errors") {
  CHECK_THROWS_AS(bleu_corpus(std::vector<CaptionPair>{}, {}), ValidationError);
  const std::vector<CaptionPair> no_refs = {{{"a"}, {}}};
  CHECK_THROWS_AS(bleu_corpus(no_refs, {}), ValidationError);
  const std::vector<CaptionPair> ok = {{{"a"}, {{"a"}}}};
  CHECK_THROWS_AS(bleu_corpus(ok, {0, false}), ValidationError);
}

TEST_CASE("ROUGE hand examples") {
  CHECK(rouge_n({"a", "b"}, Refs{{"a", "b"}}, 1) == 1.0);
  CHECK(rouge_n({"robot", "picks", "block"}, Refs{{"robot", "picks", "the", "red", "block"}}, 1) ==
        doctest::Approx(0.75).epsilon(1e-15));
  CHECK(rouge_n({"a", "b", "c", "d"}, Refs{{"b", "c", "d", "e"}}, 2) == doctest::Approx(2.0 / 3).epsilon(1e-15));
  CHECK(rouge_l({"a", "b"}, Refs{{"a", "b"}}) == 1.0);
  CHECK(rouge_l({"a", "b", "c"}, Refs{{"a", "c", "b"}}) == doctest::Approx(2.0 / 3).epsilon(1e-15));
  CHECK(rouge_l({"a", "b"}, Refs{{"c", "d"}}) == 0.0);
  CHECK(rouge_l({}, Refs{{"a"}}) == 0.0);
  CHECK_THROWS_AS(rouge_n({"a"}, Refs{{"a"}}, 0), ValidationError);
}

TEST_CASE("METEOR hand examples") {
  CHECK(meteor({"red", "block"}, Refs{{"red", "block"}}) == 0.9375);
  CHECK(meteor({"the", "robot", "moves"}, Refs{{"the", "robot", "turns"}}) == doctest::Approx(0.625).epsilon(1e-15));
  CHECK(meteor({"a"}, Refs{{"b"}}) == 0.0);
}

TEST_CASE("best reference wins for ROUGE and METEOR") {
  const Refs refs = {{"x", "y", "z"}, {"a", "b"}};
  CHECK(rouge_n({"a", "b"}, refs, 1) == 1.0);
  CHECK(rouge_l({"a", "b"}, refs) == 1.0);
  CHECK(meteor({"a", "b"}, refs) == 0.9375);
}

TEST_CASE("metric invariants") {
  const auto corpus = testing::random_corpus(99, 40, 6, 1, 10);
  for (const auto& p : corpus) {
    const Refs refs(p.references.begin(), p.references.end());
    for (const double v : {rouge_n(p.candidate, refs, 1), rouge_n(p.candidate, refs, 2), rouge_l(p.candidate, refs),
                           meteor(p.candidate, refs)}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    if (p.candidate.size() < 2) CHECK(rouge_n(p.candidate, refs, 2) == 0.0);

    // Identity.
    const Refs self = {p.candidate};
    CHECK(rouge_n(p.candidate, self, 1) == 1.0);
    CHECK(rouge_l(p.candidate, self) == 1.0);
    if (p.candidate.size() >= 2) CHECK(rouge_n(p.candidate, self, 2) == 1.0);
    const std::vector<CaptionPair> one = {{p.candidate, self}};
    CHECK(bleu_corpus(one, {1, false}) == 1.0);
  }

  // Identical sequences of distinct words form one chunk.
  for (std::size_t m = 1; m <= 8; ++m) {
    Seq s;
    for (std::size_t i = 0; i < m; ++i) s.push_back("t" + std::to_string(i));
    const double md = static_cast<double>(m);
    CHECK(meteor(s, Refs{s}) == doctest::Approx(1 - 0.5 / (md * md * md)).epsilon(1e-15));
  }
}

TEST_CASE("ROUGE-1 does not drop when a matching token is appended to a disjoint candidate") {
  // Overlap grows by one while |ref| is fixed, so recall grows; with a
  // disjoint prefix precision o/(o+2) grows too.
  const Seq ref = {"a", "b", "c", "d"};
  Seq cand = {"x", "y"};
  double prev = rouge_n(cand, Refs{ref}, 1);
  for (const auto* tok : {"a", "c", "d"}) {
    cand.push_back(tok);
    const double now = rouge_n(cand, Refs{ref}, 1);
    CHECK(now >= prev);
    prev = now;
  }
}

TEST_CASE("metrics agree with the brute-force oracle") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto corpus = testing::random_corpus(seed, 50, 20, 1, 15);
    std::vector<CaptionPair> pairs;
    for (const auto& p : corpus) pairs.push_back({p.candidate, p.references});
    for (const int n : {1, 2, 4}) {
      CHECK(std::abs(bleu_corpus(pairs, {n, false}) - testing::oracle_bleu(corpus, n, false)) < 1e-9);
      CHECK(std::abs(bleu_corpus(pairs, {n, true}) - testing::oracle_bleu(corpus, n, true)) < 1e-9);
    }
    for (const auto& p : corpus) {
      const Refs refs(p.references.begin(), p.references.end());
      CHECK(std::abs(rouge_n(p.candidate, refs, 1) - testing::oracle_rouge_n(p.candidate, p.references, 1)) < 1e-9);
      CHECK(std::abs(rouge_n(p.candidate, refs, 2) - testing::oracle_rouge_n(p.candidate, p.references, 2)) < 1e-9);
      CHECK(std::abs(rouge_l(p.candidate, refs) - testing::oracle_rouge_l(p.candidate, p.references)) < 1e-9);
      CHECK(std::abs(meteor(p.candidate, refs) - testing::oracle_meteor(p.candidate, p.references)) < 1e-9);
    }
  }
}

TEST_CASE("caption file evaluation") {
  testing::TempDir dir;
  const std::vector<dataset::CaptionRecord> same = {{"0", "The robot picks up the block.", {"the robot picks up the block"}},
                                                    {"1", "Pour water", {"pour water"}}};
  dataset::write_caption_corpus(dir / "same.jsonl", same);
  const auto report = evaluate_caption_file(dir / "same.jsonl");
  CHECK(report.pair_count == 2);
  CHECK(report.bleu == 1.0);
  CHECK(report.rouge1 == 1.0);
  CHECK(report.rouge2 == 1.0);
  CHECK(report.rougeL == 1.0);
  CHECK(report.meteor == doctest::Approx(((1 - 0.5 / 216.0) + (1 - 0.5 / 8.0)) / 2).epsilon(1e-15));

  write_file(dir / "empty.jsonl", "");
  CHECK_THROWS_AS(evaluate_caption_file(dir / "empty.jsonl"), ValidationError);
  write_file(dir / "bad.jsonl", "{\"id\":0,\"candidate\":\"x\",\"references\":[\"x\"]}\nnot json\n");
  CHECK_THROWS_AS(evaluate_caption_file(dir / "bad.jsonl"), ValidationError);
}

TEST_CASE("percent scaling only affects rendering") {
  const std::vector<CaptionPair> pairs = {{{"the", "robot"}, {{"the", "robot", "moves"}}}};
  EvalOptions opts;
  opts.bleu.max_n = 2;
  const auto plain = render_table(evaluate_pairs(pairs, opts), opts);
  opts.percent_scale = true;
  const auto report = evaluate_pairs(pairs, opts);
  CHECK(report.bleu == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  const auto scaled = render_table(report, opts);
  CHECK(plain.find("0.6065") != std::string::npos);
  CHECK(scaled.find("60.65") != std::string::npos);
}
