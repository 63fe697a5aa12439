// Stdio scorer speaking the bridge protocol with stub scores.
//   tear_scorer_stub [--constant X] [--table FILE] [--metrics a,b] [--die-after N]
// --table: tsv of sha256(candidate) <tab> score. --die-after exits after N requests.
#include <iostream>
#include <string>

#include "tear/bridge.hpp"
#include "tear/util.hpp"

int main(int argc, char** argv) {
  tear::StubScorer stub;
  long die_after = -1;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    const std::string value = argv[i + 1];
    if (flag == "--constant") {
      stub.constant = std::stod(value);
    } else if (flag == "--table") {
      for (const auto& line : tear::split(tear::read_file(value), '\n')) {
        const auto cells = tear::split(line, '\t');
        if (cells.size() == 2) stub.table[cells[0]] = std::stod(cells[1]);
      }
    } else if (flag == "--metrics") {
      stub.metrics.clear();
      for (const auto& m : tear::split(value, ',')) stub.metrics.push_back(tear::parse_neural_metric(m));
    } else if (flag == "--die-after") {
      die_after = std::stol(value);
    } else {
      std::cerr << "unknown flag " << flag << "\n";
      return 1;
    }
  }
  std::ios::sync_with_stdio(false);
  std::cout << stub.handshake_line() << "\n" << std::flush;
  std::string line;
  long served = 0;
  while (std::getline(std::cin, line)) {
    if (die_after >= 0 && served >= die_after) return 3;
    std::cout << stub.handle(line) << "\n" << std::flush;
    ++served;
  }
  return 0;
}
