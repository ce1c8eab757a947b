// SPDX-License-Identifier: Apache-2.0
// End-to-end CLI tests: each case launches the installed binary in a fresh
// temp directory and inspects exit codes plus the files it writes.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "support/subprocess.hpp"
#include "support/tmpdir.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string cli() {
#ifdef HETGT_CLI_BIN
  return std::string(HETGT_CLI_BIN);
#else
  const char* p = std::getenv("HETGT_CLI_BIN");
  REQUIRE(p != nullptr);
  return std::string(p);
#endif
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
  REQUIRE(out.good());
}

// Small bipartite graph so every CLI invocation stays fast.
json synthetic_block() {
  return {{"node_types",
           {{{"name", "paper"}, {"count", 60}, {"feature_dim", 8}},
            {{"name", "author"}, {"count", 30}, {"feature_dim", 6}}}},
          {"edge_types",
           {{{"name", "pa"}, {"src", "paper"}, {"dst", "author"},
             {"expected_degree", 2.0}},
            {{"name", "ap"}, {"src", "author"}, {"dst", "paper"},
             {"expected_degree", 2.0}}}},
          {"target_type", "paper"},
          {"num_classes", 3},
          {"signal", 2.0},
          {"seed", 7},
          {"train_per_class", 8},
          {"val_per_class", 4}};
}

json base_config(const std::string& out_dir) {
  return {{"model",
           {{"kind", "het_gtan"},
            {"depth", 2},
            {"hidden", 8},
            {"semantic_hidden", 4},
            {"aggregator", "semantic"},
            {"dropout", {{"projection", 0.1}, {"layer", 0.0}, {"attention", 0.1}}},
            {"projection_activation", "elu"},
            {"semantic_query_zero", false}}},
          {"train",
           {{"lr", 0.01},
            {"weight_decay", 0.0},
            {"max_epochs", 10},
            {"patience", 10},
            {"seed", 1},
            {"precision", "f32"},
            {"stop_metric", "val_loss"}}},
          {"synthetic", synthetic_block()},
          {"runs", 5},
          {"out", out_dir}};
}

int count_lines(const std::string& s) {
  int n = 0;
  for (const char c : s) n += (c == '\n');
  return n;
}

}  // namespace

TEST_CASE("cli train writes run artifacts and repeats byte-identically") {
  testsup::TmpDir tmp;
  const fs::path out1 = tmp.path() / "out1";
  const fs::path out2 = tmp.path() / "out2";
  const fs::path cfg = tmp.path() / "cfg.json";
  write_file(cfg, base_config(out1.string()).dump(2));

  const auto r1 = testsup::run_cmd(cli() + " train --config " + cfg.string());
  CAPTURE(r1.output);
  REQUIRE(r1.exit_code == 0);

  const std::string jsonl = slurp(out1 / "runs.jsonl");
  CHECK(count_lines(jsonl) == 5);
  std::istringstream lines(jsonl);
  std::string line;
  std::uint64_t expect_seed = 1;
  while (std::getline(lines, line)) {
    const json run = json::parse(line);
    CHECK(run.at("seed").get<std::uint64_t>() == expect_seed++);
    CHECK(run.at("diverged").get<bool>() == false);
    CHECK(run.at("epochs_run").get<int>() >= 1);
  }

  const json summary = json::parse(slurp(out1 / "summary.json"));
  CHECK(summary.at("runs").get<int>() == 5);
  CHECK(summary.at("precision").get<std::string>() == "f32");
  CHECK(summary.at("model").at("kind").get<std::string>() == "het_gtan");
  const double macro = summary.at("macro_f1").at("mean").get<double>();
  CHECK(macro >= 0.0);
  CHECK(macro <= 1.0);
  CHECK(summary.at("best_run").get<int>() >= 0);
  CHECK(summary.at("best_run").get<int>() < 5);
  CHECK(summary.at("any_diverged").get<bool>() == false);

  CHECK(fs::exists(out1 / "timing.json"));
  CHECK(fs::exists(out1 / "best.ckpt"));

  // Same config, new out dir: metric files must be byte-identical.
  const auto r2 = testsup::run_cmd(cli() + " train --config " + cfg.string() +
                                   " --out " + out2.string());
  CAPTURE(r2.output);
  REQUIRE(r2.exit_code == 0);
  CHECK(slurp(out2 / "summary.json") == slurp(out1 / "summary.json"));
  CHECK(slurp(out2 / "best.ckpt") == slurp(out1 / "best.ckpt"));

  // Per-run records match too, once wall-clock timing is stripped.
  std::istringstream a(jsonl), b(slurp(out2 / "runs.jsonl"));
  std::string la, lb;
  while (std::getline(a, la) && std::getline(b, lb)) {
    json ja = json::parse(la), jb = json::parse(lb);
    ja.erase("ms_per_epoch");
    jb.erase("ms_per_epoch");
    CHECK(ja == jb);
  }
}

TEST_CASE("cli train on a missing dataset dir fails cleanly with exit 3") {
  testsup::TmpDir tmp;
  const fs::path out = tmp.path() / "out";
  const fs::path cfg = tmp.path() / "cfg.json";
  json c = base_config(out.string());
  c.erase("synthetic");
  c["dataset"] = (tmp.path() / "no_such_dataset").string();
  write_file(cfg, c.dump(2));

  const auto r = testsup::run_cmd(cli() + " train --config " + cfg.string());
  CAPTURE(r.output);
  CHECK(r.exit_code == 3);
  CHECK(r.output.find("data error") != std::string::npos);
  // The graph is loaded before any output is created: no partial out dir.
  CHECK(!fs::exists(out));
}

TEST_CASE("cli rejects unknown config keys with exit 2 naming the key") {
  testsup::TmpDir tmp;
  const fs::path cfg = tmp.path() / "cfg.json";
  json c = base_config((tmp.path() / "out").string());
  c["modle"] = 3;
  write_file(cfg, c.dump(2));

  const auto r = testsup::run_cmd(cli() + " train --config " + cfg.string());
  CAPTURE(r.output);
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("unknown key 'modle'") != std::string::npos);

  // Nested blocks are checked the same way.
  json c2 = base_config((tmp.path() / "out").string());
  c2["train"]["learning_rate"] = 0.1;
  write_file(cfg, c2.dump(2));
  const auto r2 = testsup::run_cmd(cli() + " train --config " + cfg.string());
  CHECK(r2.exit_code == 2);
  CHECK(r2.output.find("unknown key 'learning_rate'") != std::string::npos);
}

TEST_CASE("cli gen-synthetic writes a loadable dataset, deterministically") {
  testsup::TmpDir tmp;
  const fs::path ds1 = tmp.path() / "ds1";
  const fs::path ds2 = tmp.path() / "ds2";
  const fs::path cfg = tmp.path() / "cfg.json";
  write_file(cfg, base_config(ds1.string()).dump(2));

  const auto r1 = testsup::run_cmd(cli() + " gen-synthetic --config " + cfg.string());
  CAPTURE(r1.output);
  REQUIRE(r1.exit_code == 0);
  for (const char* name : {"manifest.json", "features_paper.csv",
                           "features_author.csv", "edges_pa.csv",
                           "edges_ap.csv", "labels.csv", "splits.json"}) {
    CHECK(fs::exists(ds1 / name));
  }

  const auto r2 = testsup::run_cmd(cli() + " gen-synthetic --config " +
                                   cfg.string() + " --out " + ds2.string());
  REQUIRE(r2.exit_code == 0);
  for (const char* name : {"manifest.json", "features_paper.csv", "edges_pa.csv",
                           "labels.csv", "splits.json"}) {
    CHECK(slurp(ds2 / name) == slurp(ds1 / name));
  }

  // The written dataset trains end to end through the loader path.
  json c = base_config((tmp.path() / "out").string());
  c.erase("synthetic");
  c["dataset"] = ds1.string();
  c["train"]["max_epochs"] = 6;
  c["train"]["patience"] = 6;
  write_file(cfg, c.dump(2));
  const auto r3 = testsup::run_cmd(cli() + " train --config " + cfg.string());
  CAPTURE(r3.output);
  CHECK(r3.exit_code == 0);
  CHECK(fs::exists(tmp.path() / "out" / "summary.json"));
}

TEST_CASE("cli depth-sweep honours --depths and writes one row per depth") {
  testsup::TmpDir tmp;
  const fs::path out = tmp.path() / "sweep";
  const fs::path cfg = tmp.path() / "cfg.json";
  json c = base_config(out.string());
  c["train"]["max_epochs"] = 6;
  c["train"]["patience"] = 6;
  write_file(cfg, c.dump(2));

  const auto r = testsup::run_cmd(cli() + " depth-sweep --config " +
                                  cfg.string() + " --depths 1,2");
  CAPTURE(r.output);
  REQUIRE(r.exit_code == 0);

  const json doc = json::parse(slurp(out / "sweep.json"));
  CHECK(doc.at("depths") == json::array({1, 2}));
  REQUIRE(doc.at("rows").size() == 2);
  CHECK(doc.at("rows")[0].at("depth").get<int>() == 1);
  CHECK(doc.at("rows")[1].at("depth").get<int>() == 2);
  for (const auto& row : doc.at("rows")) {
    CHECK(row.at("model").get<std::string>() == "het_gtan");
    CHECK(row.at("any_diverged").get<bool>() == false);
    CHECK(row.at("macro_f1").at("used").get<int>() >= 1);
  }

  const std::string csv = slurp(out / "sweep.csv");
  CHECK(count_lines(csv) == 3);  // header + one row per depth
  CHECK(csv.rfind("model,depth,aggregator,", 0) == 0);
}

TEST_CASE("cli ablation compares aggregators at a fixed depth") {
  testsup::TmpDir tmp;
  const fs::path cfg = tmp.path() / "cfg.json";

  // Tiny settings: the grid retrains every row at depth 5.
  json c = base_config((tmp.path() / "abl").string());
  c["model"]["hidden"] = 4;
  c["model"]["semantic_hidden"] = 2;
  c["model"]["semantic_query_zero"] = true;
  c["train"]["max_epochs"] = 8;
  c["train"]["patience"] = 8;
  write_file(cfg, c.dump(2));

  const auto r = testsup::run_cmd(cli() + " ablation --config " + cfg.string());
  CAPTURE(r.output);
  REQUIRE(r.exit_code == 0);

  const json doc = json::parse(slurp(tmp.path() / "abl" / "ablation.json"));
  REQUIRE(doc.at("rows").size() == 4);
  const auto& rows = doc.at("rows");
  CHECK(rows[0].at("aggregator").get<std::string>() == "semantic");
  CHECK(rows[1].at("aggregator").get<std::string>() == "mean");
  CHECK(rows[2].at("aggregator").get<std::string>() == "weighted_sum");
  CHECK(rows[3].at("model").get<std::string>() == "het_gtan_ns");
  for (const auto& row : rows) CHECK(row.at("depth").get<int>() == 5);

  // With the semantic query frozen at zero the semantic aggregator computes
  // exactly the mean, so those two rows must agree to the last bit.
  CHECK(rows[0].at("macro_f1").at("mean").get<double>() ==
        rows[1].at("macro_f1").at("mean").get<double>());
  CHECK(rows[0].at("macro_f1").at("std").get<double>() ==
        rows[1].at("macro_f1").at("std").get<double>());
  CHECK(rows[0].at("micro_f1").at("mean").get<double>() ==
        rows[1].at("micro_f1").at("mean").get<double>());

  CHECK(fs::exists(tmp.path() / "abl" / "ablation.csv"));

  // Convolution-family base: no edge-attention variant, three rows.
  json c2 = json::parse(c.dump());
  c2["model"]["kind"] = "het_gtcn";
  c2["model"]["dropout"]["attention"] = 0.0;
  c2["out"] = (tmp.path() / "abl2").string();
  write_file(cfg, c2.dump(2));
  const auto r2 = testsup::run_cmd(cli() + " ablation --config " + cfg.string());
  CAPTURE(r2.output);
  REQUIRE(r2.exit_code == 0);
  const json doc2 = json::parse(slurp(tmp.path() / "abl2" / "ablation.json"));
  CHECK(doc2.at("rows").size() == 3);

  // Ablation is defined for the tree-family models only.
  json c3 = json::parse(c.dump());
  c3["model"]["kind"] = "het_gcn";
  write_file(cfg, c3.dump(2));
  const auto r3 = testsup::run_cmd(cli() + " ablation --config " + cfg.string());
  CHECK(r3.exit_code == 2);
  CHECK(r3.output.find("tree-family") != std::string::npos);
}

TEST_CASE("cli gradcheck reports per-target lines and catches injected faults") {
  const auto r = testsup::run_cmd(cli() + " gradcheck");
  CAPTURE(r.output);
  CHECK(r.exit_code == 0);

  int report_lines = 0;
  int model_lines = 0;
  std::istringstream lines(r.output);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.find("max_rel_err=") != std::string::npos) ++report_lines;
    if (line.rfind("model/", 0) == 0) ++model_lines;
  }
  CHECK(report_lines >= 20);
  CHECK(model_lines == 5);
  CHECK(r.output.find("PASS") != std::string::npos);

  const auto rf = testsup::run_cmd(cli() + " gradcheck --inject-backward-fault");
  CAPTURE(rf.output);
  CHECK(rf.exit_code != 0);
  CHECK(rf.output.find("faulty_backward") != std::string::npos);
  CHECK(rf.output.find("FAIL") != std::string::npos);
}

TEST_CASE("cli --precision override changes the recorded precision") {
  testsup::TmpDir tmp;
  const fs::path out = tmp.path() / "out";
  const fs::path cfg = tmp.path() / "cfg.json";
  json c = base_config(out.string());
  c["train"]["max_epochs"] = 4;
  c["train"]["patience"] = 4;
  write_file(cfg, c.dump(2));

  const auto r = testsup::run_cmd(cli() + " train --config " + cfg.string() +
                                  " --precision f64");
  CAPTURE(r.output);
  REQUIRE(r.exit_code == 0);
  const json summary = json::parse(slurp(out / "summary.json"));
  CHECK(summary.at("precision").get<std::string>() == "f64");

  const auto rb = testsup::run_cmd(cli() + " train --config " + cfg.string() +
                                   " --precision f16");
  CHECK(rb.exit_code != 0);
}

TEST_CASE("cli requires a subcommand and a readable config") {
  const auto r = testsup::run_cmd(cli());
  CHECK(r.exit_code != 0);

  const auto r2 = testsup::run_cmd(cli() + " train --config /no/such/file.json");
  CHECK(r2.exit_code == 2);
  CHECK(r2.output.find("cannot read config file") != std::string::npos);
}
