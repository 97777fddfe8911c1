// Regenerates the committed golden frames and their per-stage digests.
// Usage: make_golden <tests/data/golden>
#include "../tests/support/golden.hpp"

#include "arc/dataset/synthetic.hpp"

#include <fstream>
#include <iostream>

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_golden <dir>\n";
        return 2;
    }
    namespace fs = std::filesystem;
    const fs::path dir = argv[1];
    fs::create_directories(dir);

    struct Plan {
        std::size_t cls;
        int height, width;
        std::uint64_t seed;
    };
    const Plan plans[] = {{0, 240, 320, 11}, {2, 240, 320, 12}, {3, 300, 300, 13},
                          {5, 480, 640, 14}, {7, 200, 360, 15}, {9, 240, 320, 16}};

    nlohmann::json frames = nlohmann::json::object();
    for (std::size_t i = 0; i < std::size(plans); ++i) {
        const auto& p = plans[i];
        arc::Rng rng(p.seed);
        arc::dataset::SyntheticFrameConfig cfg;
        cfg.height = p.height;
        cfg.width = p.width;
        const auto frame = arc::dataset::render_shape_frame(p.cls, rng, cfg);
        char name[32];
        std::snprintf(name, sizeof name, "frame_%02zu.png", i);
        arc::vision::write_png(frame, dir / name);
        // Digest what a reader decodes, not what was rendered.
        frames[name] = arc::testing::to_json(arc::testing::stage_digests(arc::vision::read_image(dir / name)));
    }
    std::ofstream(dir / "expected.json") << nlohmann::json{{"frames", frames}}.dump(2) << '\n';
    std::cout << "wrote " << std::size(plans) << " frames to " << dir << '\n';
}
