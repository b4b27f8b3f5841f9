#pragma once

// Bundled lexicons. Same line format as external lexicon files: one entry per
// line, whitespace-separated fields, '#' starts a comment. Tests pin the
// FNV-1a hash of each block; bump the test constants when editing.

namespace clickguard::lexicon_data {

inline constexpr const char* kStopwords = R"lex(# English stop words
a
about
above
after
again
against
all
also
am
an
and
any
are
aren't
as
at
be
because
been
before
being
below
between
both
but
by
can
cannot
could
couldn't
did
didn't
do
does
doesn't
doing
don't
down
during
each
ever
few
for
from
further
had
hadn't
has
hasn't
have
haven't
having
he
her
here
hers
herself
him
himself
his
how
however
i
if
in
into
is
isn't
it
its
itself
just
me
might
more
most
must
my
myself
no
nor
not
now
of
off
on
once
only
or
other
ought
our
ours
ourselves
out
over
own
same
shall
she
should
shouldn't
so
some
such
than
that
the
their
theirs
them
themselves
then
there
these
they
this
those
through
to
too
under
until
up
very
was
wasn't
we
were
weren't
what
when
where
which
while
who
whom
why
will
with
won't
would
wouldn't
yet
you
your
yours
yourself
yourselves
)lex";

inline constexpr const char* kIrregularLemmas = R"lex(# forms that suffix rules get wrong: "form lemma", or "form" alone to pin identity
news
series
species
means
politics
economics
physics
mathematics
athletics
headquarters
people
was be
were be
is be
are be
am be
been be
being be
has have
had have
having have
did do
does do
done do
doing do
goes go
going go
went go
gone go
said say
says say
made make
making make
taking take
took take
taken take
coming come
came come
using use
giving give
gave give
given give
getting get
got get
gotten get
ran run
running run
men man
women woman
children child
feet foot
teeth tooth
mice mouse
geese goose
lives life
wives wife
knives knife
thieves thief
wolves wolf
shelves shelf
selves self
leaves leave
bought buy
brought bring
caught catch
taught teach
thought think
found find
told tell
sold sell
held hold
kept keep
left leave
felt feel
meant mean
sent send
spent spend
built build
lost lose
met meet
paid pay
laid lay
won win
wrote write
written write
writing write
broke break
broken break
chose choose
chosen choose
drove drive
driven drive
driving drive
ate eat
eaten eat
fell fall
fallen fall
flew fly
flown fly
forgot forget
forgotten forget
froze freeze
frozen freeze
grew grow
grown grow
hid hide
hidden hide
hiding hide
knew know
known know
rose rise
risen rise
rising rise
saw see
seen see
sang sing
sung sing
sank sink
spoke speak
spoken speak
stole steal
stolen steal
swam swim
threw throw
thrown throw
wore wear
worn wear
woke wake
woken wake
died die
dies die
dying die
lying lie
tying tie
tries try
tried try
cities city
babies baby
stories story
studies study
bodies body
parties party
countries country
companies company
families family
movies movie
moving move
living live
loving love
hoping hope
sharing share
saving save
dating date
voting vote
creating create
changing change
closing close
causing cause
facing face
raising raise
placing place
racing race
serving serve
trading trade
becoming become
became become
believing believe
losing lose
amazing amaze
)lex";

inline constexpr const char* kSlang = R"lex(# internet slang markers counted by Sl_w
adorbs
af
afaik
amazeballs
asap
awks
bae
bestie
besties
bff
bffs
bling
brb
bruh
btw
chill
chillin
cray
cringe
cringey
derp
diss
dissed
dm
dope
dude
emo
epic
fab
facepalm
fail
fails
fam
fanboy
fangirl
fierce
flex
flexing
fomo
ftw
fyi
ghosted
ghosting
glowup
goals
goat
gonna
gotta
gr8
gtg
gucci
hack
hacks
haha
hangry
hella
hmu
humblebrag
hype
hyped
icymi
idk
ikr
imho
imma
imo
insane
irl
istg
janky
jk
kinda
legit
lifehack
lifehacks
lit
lmao
lmfao
lol
lowkey
meme
memes
mood
nah
newb
noob
nope
nsfw
obsessed
obvi
omg
omfg
onfleek
peeps
periodt
photobomb
pic
pics
preach
pwned
queen
rekt
relatable
rickroll
rofl
salty
savage
selfie
selfies
shade
shook
simp
slay
slaps
smh
snatched
spam
squad
stan
stanning
sus
swag
swole
tbh
thicc
thirsty
tho
tldr
totes
triggered
troll
trolls
turnt
u
ugh
unfollow
upvote
vibe
vibes
viral
vlog
vlogger
wanna
whatevs
wig
woke
wow
wtf
yall
yass
yasss
yeet
yikes
yolo
zaddy
zomg
dead
)lex";

inline constexpr const char* kSynonyms = R"lex(# word followed by its replacements; the perturbation picks one at random
amazing incredible astonishing
awesome amazing incredible
beautiful gorgeous stunning
best greatest finest
big huge large
buy purchase
car vehicle automobile
cat feline
child kid
children kids
crazy insane wild
dead deceased
dog canine
easy simple effortless
famous renowned celebrated
fast quick rapid
free complimentary
funny hilarious amusing
good great fine
great fantastic wonderful
happy glad joyful
hard difficult tough
home house residence
huge enormous massive
important crucial vital
job occupation career
kill murder
know understand realize
little small tiny
look glance gaze
love adore cherish
money cash funds
movie film picture
new fresh novel
old ancient aged
people folks individuals
quick fast speedy
rich wealthy affluent
sad unhappy sorrowful
say state declare
secret mystery
see observe witness
shocking startling astonishing
show reveal display
small little tiny
smart clever intelligent
start begin commence
stop halt cease
strange weird odd
tell reveal disclose
think believe reckon
top leading premier
trick tactic ploy
want desire crave
weird strange bizarre
win triumph prevail
woman lady female
world globe planet
young youthful juvenile
)lex";

inline constexpr const char* kPronounsFirst = R"lex(i
me
my
mine
myself
we
us
our
ours
ourselves
)lex";

inline constexpr const char* kPronounsSecond = R"lex(you
your
yours
yourself
yourselves
)lex";

inline constexpr const char* kPronounsPossessive = R"lex(his
her
hers
its
their
theirs
whose
)lex";

inline constexpr const char* kPronounsOther = R"lex(he
she
it
they
them
him
who
whom
whoever
what
which
anyone
everyone
someone
nobody
anybody
everybody
somebody
something
anything
everything
nothing
)lex";

inline constexpr const char* kDeterminers = R"lex(the
a
an
this
that
these
those
each
every
either
neither
some
any
no
all
both
several
many
much
few
more
most
another
such
)lex";

inline constexpr const char* kPrepositions = R"lex(aboard
about
above
across
after
against
along
amid
among
around
as
at
before
behind
below
beneath
beside
besides
between
beyond
by
concerning
despite
down
during
except
for
from
in
inside
into
like
near
of
off
on
onto
out
outside
over
past
per
plus
regarding
since
through
throughout
till
to
toward
towards
under
underneath
until
unto
up
upon
via
vs
with
within
without
)lex";

inline constexpr const char* kVerbs = R"lex(am
is
are
was
were
be
been
being
have
has
had
having
do
does
did
done
doing
will
would
can
could
shall
should
may
might
must
ought
say
says
said
tell
tells
told
know
knows
knew
make
makes
made
get
gets
got
take
takes
took
see
sees
saw
come
comes
came
want
wants
go
goes
went
look
looks
looked
find
finds
found
give
gives
gave
think
thinks
thought
use
uses
need
needs
ask
asks
asked
feel
feels
felt
become
becomes
became
leave
leaves
left
put
puts
mean
means
meant
keep
keeps
kept
let
lets
begin
begins
began
seem
seems
seemed
help
helps
show
shows
showed
hear
hears
heard
play
plays
run
runs
ran
move
moves
live
believe
believes
bring
brings
happen
happens
happened
write
writes
wrote
sit
sits
stand
stands
lose
loses
pay
pays
meet
meets
include
includes
continue
continues
set
sets
learn
learns
change
changes
lead
leads
understand
understands
watch
watches
follow
follows
stop
stops
create
creates
speak
speaks
read
reads
spend
spends
grow
grows
open
opens
walk
walks
win
wins
teach
teaches
offer
offers
remember
remembers
consider
considers
appear
appears
buy
buys
serve
serves
die
dies
send
sends
build
builds
stay
stays
fall
falls
cut
cuts
reach
reaches
kill
kills
remain
remains
reveal
reveals
announce
announces
report
reports
discover
discovers
claim
claims
warn
warns
approve
approves
sink
sinks
spot
guess
shock
shocks
)lex";

inline constexpr const char* kAdverbs = R"lex(not
never
very
too
so
just
now
then
here
there
always
often
soon
already
again
also
even
still
yet
almost
maybe
perhaps
quite
rather
nearly
ever
once
twice
away
back
instead
together
forever
sometimes
somewhere
anywhere
everywhere
nowhere
today
tomorrow
yesterday
only
next
)lex";

inline constexpr const char* kAdjectives = R"lex(new
old
big
small
good
bad
best
worst
better
worse
great
real
top
free
hot
cold
weird
crazy
simple
easy
hard
huge
tiny
major
minor
young
local
national
foreign
early
late
last
final
full
empty
high
low
long
short
right
wrong
true
false
happy
sad
rich
poor
strong
weak
dark
light
dead
alive
beautiful
ugly
perfect
amazing
awesome
incredible
insane
popular
famous
viral
main
certain
sure
possible
impossible
available
public
private
common
rare
safe
dangerous
healthy
sick
modern
ancient
massive
giant
epic
awful
terrible
horrible
wonderful
fantastic
gorgeous
stunning
shocking
surprising
brilliant
secret
morning
missing
chinese
indian
american
australian
british
)lex";

}  // namespace clickguard::lexicon_data
