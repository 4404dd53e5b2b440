#include <iostream>
#include <string>
#include <vector>

#include "srm/harness.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        const srm::RunConfig cfg = srm::parse_config(args);
        return srm::run(cfg);
    } catch (const srm::UsageError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
