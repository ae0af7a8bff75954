#include <stdio.h>
#include <string.h>

/* Reverse S in place. */
static void reverse_line(char *s, size_t n)
{
  for (size_t i = 0; i < n / 2; i++) {
    char t = s[i];
    s[i] = s[n - 1 - i];
    s[n - 1 - i] = t;
  }
}

int main(void)
{
  char line[1024];
  while (fgets(line, sizeof line, stdin)) {
    size_t n = strcspn(line, "\n");
    reverse_line(line, n);
    line[n] = '\0';
    puts(line);
  }
  return 0;
}
