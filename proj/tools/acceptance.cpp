#include "acceptance_suite.hpp"

#include <iostream>

int main() {
    const auto results = wgmqed::acceptance::run_all(
        [](const wgmqed::acceptance::CheckResult& r) { std::cout << wgmqed::acceptance::format_line(r) << std::endl; });
    int failed = 0;
    for (const auto& r : results) failed += r.pass ? 0 : 1;
    std::cout << "SUMMARY " << results.size() - failed << '/' << results.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
