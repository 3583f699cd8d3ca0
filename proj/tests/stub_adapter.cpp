// Test double speaking the adapter protocol.
//   stub_adapter rmse [gain]      distance = gain * rmse
//   stub_adapter ssim-similarity  reports SSIM as a similarity
//   stub_adapter echo <file>      replies with the file's values in order
//   stub_adapter garbage | crash | hang | bad-ready
#include "invt/image.hpp"
#include "invt/png_io.hpp"
#include "invt/ssim.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

int main(int argc, char** argv) {
    const std::string mode = argc > 1 ? argv[1] : "rmse";
    double gain = 1.0;
    std::vector<double> echo;
    if (mode == "rmse" && argc > 2) gain = std::stod(argv[2]);
    if (mode == "echo") {
        std::ifstream in(argv[2]);
        for (double v; in >> v;) echo.push_back(v);
    }
    std::size_t served = 0;
    std::string line;
    while (std::getline(std::cin, line)) {
        if (line == "HELLO 1") {
            if (mode == "bad-ready") std::cout << "HI there" << std::endl;
            else if (mode == "ssim-similarity") std::cout << "READY stub-ssim similarity" << std::endl;
            else std::cout << "READY stub-" << mode << " distance" << std::endl;
        } else if (line.rfind("PAIR ", 0) == 0) {
            std::istringstream ss(line.substr(5));
            std::string ref, dist;
            ss >> ref >> dist;
            if (mode == "crash") return 3;
            if (mode == "hang") std::this_thread::sleep_for(std::chrono::hours(1));
            if (mode == "garbage") {
                std::cout << "VALUE 0.5" << std::endl;
                continue;
            }
            double v = 0.0;
            if (mode == "echo") {
                v = served < echo.size() ? echo[served] : 0.0;
            } else {
                const auto a = invt::load_image(ref);
                const auto b = invt::load_image(dist);
                v = mode == "ssim-similarity" ? invt::ssim(a, b) : gain * invt::rmse_energy(a, b);
            }
            ++served;
            char buf[64];
            std::snprintf(buf, sizeof buf, "DIST %.17g", v);
            std::cout << buf << std::endl;
        } else if (line == "BYE") {
            return 0;
        }
    }
    return 0;
}
