#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "kpplab/verify.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria runner"};
  std::vector<std::string> suites;
  std::string known_file;
  std::string out;
  app.add_option("suites", suites, "Suites to run (default: all)");
  app.add_option("--known-red", known_file, "Criteria expected to fail");
  app.add_option("--out", out, "Artifact root");
  CLI11_PARSE(app, argc, argv);
  if (suites.empty()) suites = kpplab::suite_names();

  std::set<std::string> known;
  if (!known_file.empty()) {
    std::ifstream in(known_file);
    if (!in) {
      std::cerr << "cannot read " << known_file << '\n';
      return 2;
    }
    for (std::string line; std::getline(in, line);) {
      if (!line.empty() && line[0] != '#') known.insert(line);
    }
  }

  kpplab::SuiteOptions opt;
  if (!out.empty()) opt.out_root = out;
  opt.on_result = [&](const kpplab::Criterion& c) {
    const std::string key = c.suite + "/" + c.id;
    std::cout << kpplab::format_criterion(c);
    if (!c.passed && !c.soft && known.count(key)) std::cout << "  (known red)";
    std::cout << std::endl;
  };

  int pass = 0, fail = 0, red = 0, surprise = 0;
  for (const auto& s : suites) {
    for (const auto& c : kpplab::run_suite(s, opt)) {
      const std::string key = c.suite + "/" + c.id;
      if (c.soft) continue;
      if (c.passed) {
        ++pass;
        if (known.count(key)) {
          ++surprise;
          std::cout << "note: " << key << " is listed as known red but passes\n";
        }
      } else if (known.count(key)) {
        ++red;
      } else {
        ++fail;
      }
    }
  }
  std::cout << "acceptance: " << pass << " passed, " << fail << " failed, " << red << " known red\n";
  return fail || surprise ? 1 : 0;
}
