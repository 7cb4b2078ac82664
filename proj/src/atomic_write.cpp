#include "atomic_write.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace rtbwt::detail {

void write_file_atomic(const std::string &path, const std::string &contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot open '" + tmp + "' for writing");
        }
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) {
            std::remove(tmp.c_str());
            throw std::runtime_error("failed while writing '" + tmp + "'");
        }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw std::runtime_error("cannot move temporary file onto '" + path + "'");
    }
}

} // namespace rtbwt::detail
