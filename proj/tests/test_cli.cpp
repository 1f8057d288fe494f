#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace {

using nlohmann::json;

std::string tmp_path(const std::string& name) { return "/tmp/rf_cli_" + name; }

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// runs the CLI, returns the exit code, captures stdout into out_path
int run_cli(const std::string& args, const std::string& out_file) {
  std::string cmd = std::string(RULEFORGE_BIN) + " " + args + " > " + out_file + " 2>/dev/null";
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

const char* kToyCsv = "f1,f2,label\n1,0,1\n1,0,1\n0,1,1\n0,0,0\n";

const char* kFairCsv =
    "age,grp,label\n"
    "20,a,1\n25,a,1\n30,a,0\n35,a,0\n40,a,1\n45,a,0\n"
    "22,b,1\n27,b,0\n32,b,1\n37,b,0\n42,b,1\n47,b,0\n";

}  // namespace

TEST_CASE("train writes a model and prints a summary") {
  write_file(tmp_path("toy.csv"), kToyCsv);
  int rc = run_cli("train --data " + tmp_path("toy.csv") +
                       " --target label --complexity 6 --rule-depth 2"
                       " --pricing exact --time-limit 20 --out " +
                       tmp_path("toy_model.json"),
                   tmp_path("train_out.json"));
  REQUIRE(rc == 0);
  json summary = json::parse(read_file(tmp_path("train_out.json")));
  CHECK(summary["objective_value"].get<double>() == doctest::Approx(0.0));
  CHECK(summary["train"]["accuracy"].get<double>() == doctest::Approx(1.0));
  CHECK(summary["rules"].get<int>() == 2);

  json model = json::parse(read_file(tmp_path("toy_model.json")));
  CHECK(model["form"] == "dnf");
  CHECK(model["rules"].size() == 2);
}

TEST_CASE("predict on the training file matches the stored labels") {
  write_file(tmp_path("toy.csv"), kToyCsv);
  REQUIRE(run_cli("train --data " + tmp_path("toy.csv") +
                      " --target label --complexity 6 --rule-depth 2 --pricing exact"
                      " --time-limit 20 --out " +
                      tmp_path("toy_model.json"),
                  tmp_path("ignore.txt")) == 0);
  int rc = run_cli("predict --model " + tmp_path("toy_model.json") + " --data " +
                       tmp_path("toy.csv"),
                   tmp_path("preds.csv"));
  REQUIRE(rc == 0);
  CHECK(read_file(tmp_path("preds.csv")) == "prediction\n1\n1\n1\n0\n");
}

TEST_CASE("evaluate reproduces the reported train metrics") {
  write_file(tmp_path("toy.csv"), kToyCsv);
  REQUIRE(run_cli("train --data " + tmp_path("toy.csv") +
                      " --target label --complexity 6 --rule-depth 2 --pricing exact"
                      " --time-limit 20 --out " +
                      tmp_path("toy_model.json"),
                  tmp_path("train_out.json")) == 0);
  json summary = json::parse(read_file(tmp_path("train_out.json")));
  REQUIRE(run_cli("evaluate --model " + tmp_path("toy_model.json") + " --data " +
                      tmp_path("toy.csv"),
                  tmp_path("eval.json")) == 0);
  json eval = json::parse(read_file(tmp_path("eval.json")));
  CHECK(eval["accuracy"].get<double>() ==
        doctest::Approx(summary["train"]["accuracy"].get<double>()));
  CHECK(eval["hamming_loss"] == summary["train"]["hamming_loss"]);
}

TEST_CASE("bad flags exit 2") {
  write_file(tmp_path("toy.csv"), kToyCsv);
  CHECK(run_cli("train --data " + tmp_path("toy.csv") +
                    " --target label --fairness eqopp",
                tmp_path("junk.txt")) == 2);
  CHECK(run_cli("train --target label", tmp_path("junk.txt")) == 2);
  CHECK(run_cli("train --data " + tmp_path("toy.csv") +
                    " --target label --objective bogus",
                tmp_path("junk.txt")) == 2);
}

TEST_CASE("data errors exit 3") {
  write_file(tmp_path("bad.csv"), "f1,label\n1,1\n2,2\n3,3\n");
  CHECK(run_cli("train --data " + tmp_path("bad.csv") + " --target label",
                tmp_path("junk.txt")) == 3);
  CHECK(run_cli("train --data /tmp/does_not_exist_rf.csv --target label",
                tmp_path("junk.txt")) == 3);
}

TEST_CASE("cnf flag tags the model and keeps predictions consistent") {
  write_file(tmp_path("toy.csv"), kToyCsv);
  REQUIRE(run_cli("train --data " + tmp_path("toy.csv") +
                      " --target label --complexity 8 --rule-depth 2 --pricing exact"
                      " --time-limit 20 --cnf --out " +
                      tmp_path("cnf_model.json"),
                  tmp_path("cnf_out.json")) == 0);
  json model = json::parse(read_file(tmp_path("cnf_model.json")));
  CHECK(model["form"] == "cnf");
  REQUIRE(run_cli("predict --model " + tmp_path("cnf_model.json") + " --data " +
                      tmp_path("toy.csv"),
                  tmp_path("cnf_preds.csv")) == 0);
  // the toy data is separable either way
  CHECK(read_file(tmp_path("cnf_preds.csv")) == "prediction\n1\n1\n1\n0\n");
}

TEST_CASE("cv produces per-fold results with deterministic folds") {
  write_file(tmp_path("fair.csv"), kFairCsv);
  std::string args = "cv --data " + tmp_path("fair.csv") +
                     " --target label --folds 3 --complexity 6 --rule-depth 2"
                     " --pricing exact --time-limit 10 --seed 5";
  REQUIRE(run_cli(args, tmp_path("cv1.json")) == 0);
  REQUIRE(run_cli(args, tmp_path("cv2.json")) == 0);
  CHECK(read_file(tmp_path("cv1.json")) == read_file(tmp_path("cv2.json")));
  json rep = json::parse(read_file(tmp_path("cv1.json")));
  REQUIRE(rep["folds"].size() == 3);
  double mean = rep["test_accuracy_mean"].get<double>();
  double lo = 1.0, hi = 0.0;
  for (const auto& f : rep["folds"]) {
    double a = f["test"]["accuracy"].get<double>();
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  CHECK(mean >= lo - 1e-12);
  CHECK(mean <= hi + 1e-12);
}

TEST_CASE("cv rejects classes smaller than the fold count") {
  write_file(tmp_path("tiny.csv"), "f1,label\n1,1\n0,0\n1,1\n");
  CHECK(run_cli("cv --data " + tmp_path("tiny.csv") +
                    " --target label --folds 2 --time-limit 5",
                tmp_path("junk.txt")) == 3);
}

TEST_CASE("sweep emits a frontier CSV with pareto flags") {
  write_file(tmp_path("fair.csv"), kFairCsv);
  REQUIRE(run_cli("sweep --data " + tmp_path("fair.csv") +
                      " --target label --param complexity --values 3 6"
                      " --rule-depth 2 --pricing exact --time-limit 10",
                  tmp_path("sweep.csv")) == 0);
  std::string csv = read_file(tmp_path("sweep.csv"));
  CHECK(csv.find("param,complexity") == 0);
  int lines = 0;
  for (char c : csv)
    if (c == '\n') ++lines;
  CHECK(lines == 3);  // header + two rows
}

TEST_CASE("fairness sweep keeps the train gap within eps") {
  write_file(tmp_path("fair.csv"), kFairCsv);
  REQUIRE(run_cli("sweep --data " + tmp_path("fair.csv") +
                      " --target label --group grp --fairness eqopp"
                      " --param eps1 --values 0 1 --complexity 8 --rule-depth 2"
                      " --pricing exact --time-limit 15",
                  tmp_path("fsweep.csv")) == 0);
  std::istringstream in(read_file(tmp_path("fsweep.csv")));
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    double eps = std::stod(cell);
    std::getline(row, cell, ',');
    std::getline(row, cell, ',');
    std::getline(row, cell, ',');
    std::getline(row, cell, ',');
    double train_gap = std::stod(cell);
    CHECK(train_gap <= eps + 1e-6);
  }
}
