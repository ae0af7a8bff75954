#include <ctype.h>
#include <stdio.h>

static int is_vowel(int c)
{
  c = tolower(c);
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

int main(void)
{
  int c, count = 0;
  while ((c = getchar()) != EOF)
    count += is_vowel(c);
  printf("%d\n", count);
  return 0;
}
