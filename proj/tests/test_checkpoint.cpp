#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "dancer/checkpoint.hpp"
#include "dancer/rng.hpp"

using namespace dancer;
namespace fs = std::filesystem;

namespace {
fs::path temp_file(const char* name) {
    fs::path dir = fs::temp_directory_path() / "dancer_ckpt_test";
    fs::create_directories(dir);
    return dir / name;
}
}  // namespace

TEST_CASE("checkpoint round trips tensors and metadata bit for bit") {
    Rng rng(314);
    Checkpoint ckpt;
    ckpt.metadata["kind"] = "test";
    ckpt.metadata["epoch"] = 12;
    ckpt.metadata["nested"] = {{"lr", 0.0002}, {"flag", true}};
    for (int t = 0; t < 5; ++t) {
        std::vector<int64_t> shape;
        for (uint64_t d = 0; d < 1 + rng.next_index(2); ++d)
            shape.push_back(1 + static_cast<int64_t>(rng.next_index(7)));
        Tensor tensor(shape);
        for (int64_t i = 0; i < tensor.numel(); ++i) tensor[i] = rng.next_real(-10, 10);
        ckpt.add("tensor_" + std::to_string(t), tensor);
    }

    fs::path file = temp_file("roundtrip.ckpt");
    ckpt.save(file);
    Checkpoint back = Checkpoint::load(file);

    CHECK(back.metadata == ckpt.metadata);
    REQUIRE(back.tensors.size() == ckpt.tensors.size());
    for (size_t i = 0; i < ckpt.tensors.size(); ++i) {
        CHECK(back.tensors[i].first == ckpt.tensors[i].first);
        const Tensor& a = ckpt.tensors[i].second;
        const Tensor& b = back.tensors[i].second;
        REQUIRE(a.shape() == b.shape());
        for (int64_t j = 0; j < a.numel(); ++j) CHECK(a[j] == b[j]);
    }
}

TEST_CASE("checkpoint save and load are byte stable") {
    Checkpoint ckpt;
    ckpt.metadata["b"] = 1;
    ckpt.metadata["a"] = 2;
    Tensor t({3}, {1.5, -2.25, 0.0});
    ckpt.add("w", t);
    fs::path f1 = temp_file("stable1.ckpt");
    fs::path f2 = temp_file("stable2.ckpt");
    ckpt.save(f1);
    Checkpoint::load(f1).save(f2);
    std::ifstream a(f1, std::ios::binary), b(f2, std::ios::binary);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
}

TEST_CASE("checkpoint rejects damaged files") {
    fs::path file = temp_file("damaged.ckpt");
    {
        Checkpoint ckpt;
        ckpt.metadata["kind"] = "test";
        ckpt.add("w", Tensor({4}, {1, 2, 3, 4}));
        ckpt.save(file);
    }
    SUBCASE("bad magic") {
        std::fstream f(file, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(0);
        f.write("XXXX", 4);
        f.close();
        CHECK_THROWS_AS(Checkpoint::load(file), DataError);
    }
    SUBCASE("truncation") {
        auto size = fs::file_size(file);
        fs::resize_file(file, size - 9);
        CHECK_THROWS_AS(Checkpoint::load(file), DataError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(Checkpoint::load(temp_file("nope.ckpt")), DataError);
    }
}

TEST_CASE("parameter sets restore by name with shape checks") {
    ParamSet params;
    Rng rng(7);
    for (const char* name : {"a", "b", "c"}) {
        Parameter& p = params.add(name, {2, 3});
        for (int64_t i = 0; i < p.value.numel(); ++i) p.value[i] = rng.next_real(-1, 1);
    }
    Checkpoint ckpt;
    ckpt.add_params(params);
    fs::path file = temp_file("params.ckpt");
    ckpt.save(file);

    ParamSet fresh;
    for (const char* name : {"a", "b", "c"}) fresh.add(name, {2, 3});
    Checkpoint::load(file).restore_params(fresh);
    for (size_t i = 0; i < params.size(); ++i)
        for (int64_t j = 0; j < params[i].value.numel(); ++j)
            CHECK(fresh[i].value[j] == params[i].value[j]);

    ParamSet extra;
    extra.add("a", {2, 3});
    extra.add("missing", {1});
    CHECK_THROWS_AS(Checkpoint::load(file).restore_params(extra), DataError);

    ParamSet wrong;
    wrong.add("a", {3, 2});
    CHECK_THROWS_AS(Checkpoint::load(file).restore_params(wrong), DataError);
}
