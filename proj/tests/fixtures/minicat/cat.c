#include <errno.h>
#include <stdio.h>
#include <string.h>
#include <unistd.h>

#define MAX_LINE 4096
#define IS_FLAG(s, c) ((s)[0] == '-' && (s)[1] == (c) && (s)[2] == '\0')

static size_t safe_write(int fd, const char *buf, size_t n)
{
  ssize_t r;
  do {
    r = write(fd, buf, n);
  } while (r < 0 && errno == EINTR);
  return r < 0 ? 0 : (size_t) r;
}

/* Write all N bytes of BUF to FD, retrying short writes.
   Return the number of bytes written, which is less than N only on error. */
size_t full_write(int fd, const char *buf, size_t n)
{
  size_t done = 0;
  while (done < n) {
    size_t w = safe_write(fd, buf + done, n - done);
    if (w == 0)
      break;
    done += w;
  }
  return done;
}

// Copy every line of IN to standard output.
// When NUMBER is nonzero each line is prefixed with its right-aligned
// line number and a tab, as cat -n does. Returns the number of lines copied.
long cat_stream(FILE *in, int number)
{
  char line[MAX_LINE];
  char prefix[32];
  long count = 0;
  while (fgets(line, sizeof line, in)) {
    size_t len = strlen(line);
    count++;
    if (number) {
      int p = snprintf(prefix, sizeof prefix, "%6ld\t", count);
      full_write(1, prefix, (size_t) p);
    }
    if (full_write(1, line, len) != len)
      return -1;
  }
  return count;
}

int main(int argc, char **argv)
{
  int number = 0;
  int status = 0;
  int files = 0;
  for (int i = 1; i < argc; i++) {
    if (IS_FLAG(argv[i], 'n')) {
      number = 1;
      continue;
    }
    FILE *f = fopen(argv[i], "r");
    files++;
    if (!f) {
      fprintf(stderr, "minicat: %s: %s\n", argv[i], strerror(errno));
      status = 1;
      continue;
    }
    if (cat_stream(f, number) < 0)
      status = 1;
    fclose(f);
  }
  if (files == 0 && cat_stream(stdin, number) < 0)
    status = 1;
  return status;
}
